#include <exception>
#include <iostream>

#include "geodep/commands.hpp"

int main(int argc, char** argv) {
  try {
    return geodep::cli::main(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
