#include "xfield/cli.hpp"

int main(int argc, char** argv) { return xfield::run_cli(argc, argv); }
