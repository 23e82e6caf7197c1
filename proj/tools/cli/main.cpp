#include "commands.hpp"

int main(int argc, char** argv) { return dualdecomp::cli::run(argc, argv); }
