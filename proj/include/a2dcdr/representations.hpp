#pragma once

#include <array>

#include "a2dcdr/autodiff.hpp"

namespace a2dcdr {

// Row-aligned representations for one batch of users (and candidate items),
// indexed by domain: [0] = A, [1] = B.
struct DisentangledBatch {
  std::array<Matrix, 2> h_t;  // domain-encompassing user reps
  std::array<Matrix, 2> h_s;  // domain-specific user reps
  std::array<Matrix, 2> h_v;  // item reps
};

// Same layout on a tape.
struct DisentangledVars {
  std::array<ad::Var, 2> h_t;
  std::array<ad::Var, 2> h_s;
};

}  // namespace a2dcdr
