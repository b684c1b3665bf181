#include "quditops/cli.hpp"

int main(int argc, char** argv) { return quditops::cli::run(argc, argv); }
