#include "cli.hpp"

int main(int argc, char** argv) { return scusum::cli::cli_main(argc, argv); }
