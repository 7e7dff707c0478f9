#include "w3cone/cli.hpp"

int main(int argc, char** argv) { return w3cone::run_cli(argc, argv); }
