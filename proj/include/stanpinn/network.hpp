#pragma once

#include <span>

#include "stanpinn/param_set.hpp"

namespace stanpinn {

/// One tape per evaluation context. A context registers every parameter as a
/// tape leaf (indices 0..n-1 match the flattened ParamSet), then records
/// point evaluations on top; rollback() rewinds to the leaves so the context
/// can be reused for the next point. Contexts are independent and may run in
/// parallel; a single context is never shared between threads.
struct EvalContext {
  Tape tape;
  std::size_t n_params = 0;

  void reset(const ParamSet& p) {
    tape.truncate(0);
    tape.track_second = true;
    for (double v : p.flat()) tape.leaf(v);
    n_params = p.size();
    base_ = p.size();
  }

  void rollback() { tape.truncate(base_); }

  Sc param(const ParamSet& p, std::size_t i) const {
    return Sc{static_cast<int32_t>(i), p.flat()[i]};
  }

 private:
  std::size_t base_ = 0;
};

/// The multilayer map: affine layers with the configured activation on every
/// hidden layer; the final layer is purely affine.
class Network {
 public:
  Network(const NetConfig& cfg) : cfg_(cfg) { cfg.validate(); }

  const NetConfig& config() const { return cfg_; }

  /// Forward pass over jets. Inputs are already lifted by the caller.
  std::vector<DiffValue> forward(EvalContext& ctx, const ParamSet& p,
                                 std::span<const DiffValue> input) const;

  /// Lifts a point, seeds one input direction (seed_dim < 0 for none) and
  /// runs the forward pass. order selects how many input derivatives the
  /// jets track (0, 1 or 2). Returns the first output component.
  DiffValue eval(EvalContext& ctx, const ParamSet& p, std::span<const double> x,
                 int seed_dim, int order) const;

  /// Plain numeric evaluation (no tape); used by test grids and references.
  double value(const ParamSet& p, std::span<const double> x) const;

  std::size_t param_count() const;

 private:
  NetConfig cfg_;
};

}  // namespace stanpinn
