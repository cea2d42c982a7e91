#include "cli/app.hpp"

int main(int argc, char** argv) { return opdrift::cli::run_cli(argc, argv); }
