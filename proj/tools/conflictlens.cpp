#include "cfl/cli.hpp"

int main(int argc, char** argv) { return cfl::cli_main(argc, argv); }
