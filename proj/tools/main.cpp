#include "cli.hpp"

int main(int argc, char** argv) { return conflap::cli::run(argc, argv); }
