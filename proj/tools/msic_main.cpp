#include "msic/cli/cli.hpp"

int main(int argc, char** argv) { return msic::cli::run_cli(argc, argv); }
