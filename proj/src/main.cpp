#include "unshuffle/cli.hpp"

int main(int argc, char** argv) { return unshuffle::cli_main(argc, argv); }
