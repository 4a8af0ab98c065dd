#include "topoimg/cli.hpp"

int main(int argc, char** argv) { return topoimg::run_cli(argc, argv); }
