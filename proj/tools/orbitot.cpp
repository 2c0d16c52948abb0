#include "orbitot/cli.hpp"

int main(int argc, char** argv) { return orbitot::cli::main(argc, argv); }
