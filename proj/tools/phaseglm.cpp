#include "phaseglm/cli.hpp"

int main(int argc, char** argv) { return phaseglm::run_cli(argc, argv); }
