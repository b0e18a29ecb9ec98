#include "nanotorus/cli.hpp"

int main(int argc, char** argv) { return nanotorus::cli::run(argc, argv); }
