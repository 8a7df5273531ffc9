#include <cstdlib>
#include <iostream>

#include "gemini_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  gemini::cli::Environment env;
  if (const char* seed = std::getenv("GEMINI_SEED")) env.seed = seed;
  return gemini::cli::run(std::move(args), std::cout, std::cerr, env);
}
