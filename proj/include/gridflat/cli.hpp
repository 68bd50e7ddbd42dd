#pragma once

namespace gridflat {

/// Entry point shared by the binary and the tests. Exit codes: 0 on
/// optimal/pass, 1 on input errors, 2 on infeasible results or failed checks.
int run_cli(int argc, const char* const* argv);

}  // namespace gridflat
