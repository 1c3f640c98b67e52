#include "ertkit/cli.hpp"

int main(int argc, char** argv) { return ertkit::run_cli(argc, argv); }
