#include "wordorder/cli/commands.hpp"

int main(int argc, char** argv) { return wo::run_cli(argc, argv); }
