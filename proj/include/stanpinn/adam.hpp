#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stanpinn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m, v;
  int64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update applied in place on the flattened view.
/// Rejects non-finite gradient entries, naming the offending index.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               const AdamOptions& opt);

}  // namespace stanpinn
