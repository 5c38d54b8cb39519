#include "tig/cli.hpp"

int main(int argc, char** argv) { return tig::run_cli(argc, argv); }
