#include "mtpath/cli.hpp"

int main(int argc, char** argv) { return mtpath::run_cli(argc, argv); }
