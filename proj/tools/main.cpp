#include "hclab_cli.hpp"

int main(int argc, char** argv) { return hclab::cli::run_cli(argc, argv); }
