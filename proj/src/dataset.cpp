#include "specbound/dataset.hpp"

#include "specbound/errors.hpp"

namespace specbound {

void validate(const Dataset& data) {
  if (data.xs.empty()) throw usage_error("dataset: empty");
  if (data.xs.size() != data.ys.size())
    throw usage_error("dataset: sample/label count mismatch");
  if (data.input_dim < 1 || data.num_classes < 1)
    throw usage_error("dataset: bad dimensions");
  if (data.norm_bound <= 0.0) throw usage_error("dataset: B must be > 0");
  for (std::size_t s = 0; s < data.xs.size(); ++s) {
    check_finite(data.xs[s], "dataset sample");
    if (data.xs[s].size() != data.input_dim)
      throw usage_error("dataset: sample " + std::to_string(s) +
                        " has wrong dimension");
    if (data.xs[s].norm() > data.norm_bound * (1.0 + 1e-9))
      throw usage_error("dataset: sample " + std::to_string(s) +
                        " violates the norm bound B");
    if (data.ys[s] < 0 || data.ys[s] >= data.num_classes)
      throw usage_error("dataset: label out of range at sample " +
                        std::to_string(s));
  }
}

}  // namespace specbound
