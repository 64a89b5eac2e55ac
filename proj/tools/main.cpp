#include "cli.hpp"

int main(int argc, char** argv) { return rcshrink::cli::run(argc, argv); }
