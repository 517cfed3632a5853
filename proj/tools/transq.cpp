#include <iostream>
#include <string>
#include <vector>

#include "transq/cli.hpp"

int main(int argc, char** argv)
{
    return transq::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
