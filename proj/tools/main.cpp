#include "graphrd/cli.hpp"

int main(int argc, char** argv) { return graphrd::run_cli(argc, argv); }
