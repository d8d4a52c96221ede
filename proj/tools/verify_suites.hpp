#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "specdist/spectral.hpp"

namespace specdist::verify {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = true;
  double worst = 0.0;     // largest observed error (or violation count)
  double tolerance = 0.0;
  int cases = 0;
  std::string detail;     // first failing case, if any
};

struct SuiteOptions {
  int models = 0;          // 0: suite default
  std::uint64_t seed = 1;
};

/// Random model with p in [1, p_max], c1, c2 in (c_lo, c_hi) and
/// log-uniform eigenvalues in [0.1, 10].
SpectralModel random_model(std::mt19937_64 &rng, int p_max, double c_lo = 0.05,
                           double c_hi = 0.9);

/// Degenerate fixtures with repeated eigenvalues.
std::vector<SpectralModel> duplicate_fixtures();

std::vector<CheckResult> spectral_suite(const SuiteOptions &opt);
std::vector<CheckResult> dilog_suite(const SuiteOptions &opt);
std::vector<CheckResult> oracle_suite(const SuiteOptions &opt);
std::vector<CheckResult> limits_suite(const SuiteOptions &opt);

/// "all", "spectral", "dilog", "oracle" or "limits".
std::vector<CheckResult> run_suite(const std::string &suite, const SuiteOptions &opt);

bool all_passed(const std::vector<CheckResult> &checks);

} // namespace specdist::verify
