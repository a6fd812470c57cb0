#include "mflow/cli/runner.hpp"

int main(int argc, char** argv) { return mflow::cli::main_entry(argc, argv); }
