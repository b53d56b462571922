#include "featrank/cli.hpp"

int main(int argc, char** argv) { return featrank::cli::main(argc, argv); }
