#include "gnls/cli.hpp"

int main(int argc, char** argv) { return gnls::run_cli(argc, argv); }
