#include "erec/cli.hpp"

int main(int argc, char** argv) { return erec::cli::run(argc, argv); }
