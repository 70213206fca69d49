#include "evosts/cli.hpp"

int main(int argc, char** argv) { return evosts::run_cli(argc, argv); }
