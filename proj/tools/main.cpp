#include "cli.hpp"

int main(int argc, char** argv) { return entangle::cli::run_cli(argc, argv); }
