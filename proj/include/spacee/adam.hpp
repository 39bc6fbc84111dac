#pragma once

#include <cstdint>

#include "spacee/model.hpp"

namespace spacee {

// First/second moment accumulators shaped like the parameters they track.
struct AdamState {
  ModelParams first;
  ModelParams second;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(const ModelShape& shape) : first(shape), second(shape) {}

  bool operator==(const AdamState&) const = default;
};

// Lazy bias-corrected Adam: only rows present in `grads` are touched. Throws
// NumericError naming the first non-finite gradient entry; nothing is updated
// in that case. With `round_to_float`, touched rows are stored rounded to
// single precision.
void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state, double lr,
               bool round_to_float = false);

}  // namespace spacee
