#include "cli.hpp"

int main(int argc, char** argv) { return spsd::cli::run_command(argc, argv); }
