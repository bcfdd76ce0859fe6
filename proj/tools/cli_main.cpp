#include "ikern/cli.hpp"

int main(int argc, char** argv) { return ikern::cli::run(argc, argv); }
