#pragma once

// The bundled verification suite: golden classifications, the worked example
// instance, engine-versus-oracle differential fuzzing, the homomorphism
// properties behind the classifier, and gadget soundness sweeps. Each check
// prints as one pass/fail line; the acceptance test binary and the CLI
// `selftest` verb both run it.

#include <cstdint>
#include <string>
#include <vector>

namespace cqa {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double ms = 0.0;

  std::string line() const;
};

struct SelftestOptions {
  std::uint64_t seed = 20240817;
  // Reduced iteration counts for interactive runs; the acceptance suite
  // runs full counts.
  bool quick = false;
};

std::vector<CriterionResult> run_selftest(const SelftestOptions& opt = {});

}  // namespace cqa
