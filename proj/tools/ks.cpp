#include "ks/cli.hpp"

int main(int argc, char** argv) { return ks::cli::main(argc, argv); }
