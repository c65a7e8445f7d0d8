#include "aggspec/cli.hpp"

int main(int argc, char** argv) { return aggspec::cli_main(argc, argv); }
