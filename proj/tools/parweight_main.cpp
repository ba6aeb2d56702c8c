#include "parweight/cli.hpp"

int main(int argc, char** argv) { return parweight::cli_main(argc, argv); }
