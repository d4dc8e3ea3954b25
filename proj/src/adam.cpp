#include "stanpinn/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stanpinn {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               const AdamOptions& opt) {
  if (params.size() != grad.size())
    throw std::invalid_argument("adam_step: gradient length mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i]))
      throw std::invalid_argument("adam_step: non-finite gradient at parameter index " +
                                  std::to_string(i));
  }

  state.t += 1;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * grad[i];
    state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
  }
}

}  // namespace stanpinn
