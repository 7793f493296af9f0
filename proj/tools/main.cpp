#include "betamix/cli.hpp"

int main(int argc, char** argv) { return betamix::run_cli(argc, argv); }
