#include "htail/cli.hpp"

int main(int argc, char** argv) { return htail::cli::main(argc, argv); }
