// One line per acceptance criterion; exit status 1 if any fails.
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "manyq/validation.hpp"

int main(int argc, char** argv) {
  manyq::ValidationOptions opt;
  if (argc > 1) opt.seed = std::stoull(argv[1]);
  if (argc > 2) opt.threads = static_cast<unsigned>(std::stoul(argv[2]));
  int failed = 0;
  manyq::run_acceptance(opt, [&](const manyq::CriterionResult& r) {
    std::cout << manyq::format_result(r) << std::endl;
    if (!r.passed) ++failed;
  });
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
