#include "smallgain/cli.hpp"

int main(int argc, char** argv) { return smallgain::cli::run(argc, argv); }
