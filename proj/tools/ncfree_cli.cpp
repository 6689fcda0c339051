#include "ncfree/cli.hpp"

int main(int argc, char** argv) { return ncfree::cli::run(argc, argv); }
