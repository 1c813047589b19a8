#include "ctkb/cli.hpp"

int main(int argc, char** argv) { return ctkb::run_cli(std::vector<std::string>(argv, argv + argc)); }
