#include <iostream>

#include "sflow/cli.hpp"

int main(int argc, char** argv) { return sflow::dispatch(argc, argv, std::cout, std::cerr); }
