#pragma once

// Central finite-difference checks of the tape gradients on tiny instances.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "a2dcdr/autodiff.hpp"

namespace a2dcdr {

// Builds a scalar from the current contents of the probed matrices.
using Objective = std::function<ad::Var(ad::Binder&)>;

struct Probe {
  std::string name;
  Matrix* target = nullptr;
  // Expected ratio analytic / numeric: -scale for inputs behind a gradient reversal.
  double sign = 1.0;
};

struct ProbeError {
  std::string name;
  double relative_error = 0.0;
};

// ||analytic - sign * numeric|| / max(||analytic||, ||numeric||, 1e-8) per probe.
std::vector<ProbeError> probe_errors(const Objective& objective, std::span<const Probe> probes, double step = 1e-6);

struct GradCheckOptions {
  int d = 4;
  int n = 6;
  double step = 1e-6;
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  std::string suite;
  std::string worst_probe;
  double worst_relative_error = 0.0;
  bool passed = false;
};

// Suites: dc_mmd (gradient reversal included), club, club_likelihood,
// reconstruction, tafc_bce, sum_pool_bce, propagate, total_equals_ce.
std::vector<GradCheckResult> run_gradient_checks(const GradCheckOptions& options = {});

}  // namespace a2dcdr
