#include "xphase/cli.hpp"

int main(int argc, char** argv) { return xphase::cli::run(argc, argv); }
