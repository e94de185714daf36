#include "unida/cli.hpp"

int main(int argc, char** argv) { return unida::run_cli(argc, argv); }
