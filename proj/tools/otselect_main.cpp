#include "otselect/cli.hpp"

int main(int argc, char** argv) { return otselect::cli::main(argc, argv); }
