#include "ddcs/cli.hpp"

int main(int argc, char** argv) { return ddcs::cli::run(argc, argv); }
