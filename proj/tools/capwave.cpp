#include "capwave/cli.hpp"

int main(int argc, char** argv) { return capwave::run_cli(argc, argv); }
