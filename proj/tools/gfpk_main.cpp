#include "gfpk/runner.hpp"

int main(int argc, char** argv) { return gfpk::cli_main(argc, argv); }
