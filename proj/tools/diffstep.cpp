#include "diffstep/cli.hpp"

int main(int argc, char** argv) { return diffstep::cli::main_entry(argc, argv); }
