#include "floqlat/cli.hpp"

int main(int argc, char** argv) { return floqlat::cli::run(argc, argv); }
