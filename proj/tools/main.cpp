#include "amctl/cli.hpp"

int main(int argc, char** argv) { return amctl::run_cli(argc, argv); }
