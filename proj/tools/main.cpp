#include "cli.hpp"

int main(int argc, char** argv) { return creditband::cli::run_main(argc, argv); }
