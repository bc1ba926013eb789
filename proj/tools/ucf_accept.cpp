// Runs acceptance criteria 1-9 and prints one PASS/FAIL line per criterion.
// Usage: ucf_accept [-v] [id...]
#include <cstring>
#include <iostream>
#include <string>

#include "ucf/acceptance.hpp"

int main(int argc, char** argv) {
  ucf::acceptance::Options options;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "-v") == 0) verbose = true;
    else options.only.push_back(std::stoi(argv[i]));
  }
  if (verbose) options.progress = &std::cerr;
  bool ok = true;
  try {
    for (const auto& r : ucf::acceptance::run_all(options)) {
      std::cout << ucf::acceptance::format(r) << std::endl;
      ok = ok && r.pass;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return ok ? 0 : 3;
}
