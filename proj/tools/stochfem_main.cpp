#include <iostream>
#include <string>
#include <vector>

#include "stochfem/cli.hpp"

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv + 1, argv + argc);
    return stochfem::main_entry(args, std::cout, std::cerr);
}
