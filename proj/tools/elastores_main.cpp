#include "elastores/cli_io.hpp"

int main(int argc, char** argv) { return elastores::run_cli(argc, argv); }
