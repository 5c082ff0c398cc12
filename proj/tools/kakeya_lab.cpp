#include <iostream>

#include "kakeya/lab.hpp"

int main(int argc, char** argv) {
  return kakeya::lab::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
