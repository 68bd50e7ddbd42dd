#include "gridflat/cli.hpp"

int main(int argc, char** argv) { return gridflat::run_cli(argc, argv); }
