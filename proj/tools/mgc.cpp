/**
 * mgc: command-line front end.
 */

#include <iostream>
#include "mgc/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return mgc::runCli(args, MGC_DATA_DIR, std::cout, std::cerr);
}
