#include "duality_bounds/cli.hpp"

int main(int argc, char** argv) { return duality_bounds::run_cli(argc, argv); }
