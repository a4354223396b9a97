#pragma once

#include <vector>

#include "specbound/linalg.hpp"

namespace specbound {

// Labeled samples with a certified ℓ₂ norm bound: every |x|₂ ≤ norm_bound.
struct Dataset {
  std::vector<Vector> xs;
  std::vector<int> ys;
  int input_dim = 0;
  int num_classes = 0;
  double norm_bound = 0.0;

  int size() const { return static_cast<int>(xs.size()); }
};

// Enforces the Dataset invariants; every construction path (generator,
// loader, deserializer) calls this. Throws usage_error on violation.
void validate(const Dataset& data);

}  // namespace specbound
