#include "cli.hpp"

int main(int argc, char** argv) { return wifield::cli::run_cli(argc, argv); }
