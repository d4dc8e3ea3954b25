#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stanpinn/activation.hpp"

namespace stanpinn {

/// Network shape plus activation choice and reproducible init seed.
struct NetConfig {
  int input_dim = 1;
  int output_dim = 1;
  std::vector<int> hidden_widths;  // one entry per hidden layer
  ActivationKind activation = ActivationKind::Tanh;
  double beta_init = 1.0;  // ignored for Tanh
  uint64_t seed = 0;

  int depth() const { return static_cast<int>(hidden_widths.size()) + 1; }
  void validate() const;
};

/// All trainable quantities, stored flat. Layout, per affine layer k:
/// W^k row-major (out x in), then b^k, then the activation scales beta^k for
/// hidden layers when the activation has them. Extra trainable coefficients
/// (e.g. the inverse-problem diffusivity) sit at the very end.
class ParamSet {
 public:
  ParamSet() = default;

  /// Fan-based scaled-uniform weights, zero biases, constant beta_init
  /// scales. Deterministic given cfg.seed.
  static ParamSet init(const NetConfig& cfg);

  std::size_t size() const { return data_.size(); }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  std::vector<double> flatten() const { return data_; }
  void set_flat(std::span<const double> v);

  int n_layers() const { return static_cast<int>(layer_in_.size()); }
  int layer_in(int k) const { return layer_in_[k]; }
  int layer_out(int k) const { return layer_out_[k]; }
  bool has_betas() const { return has_betas_; }

  std::size_t w_index(int layer, int row, int col) const {
    return w_off_[layer] + static_cast<std::size_t>(row) * layer_in_[layer] + col;
  }
  std::size_t b_index(int layer, int row) const { return b_off_[layer] + row; }
  std::size_t beta_index(int layer, int row) const { return beta_off_[layer] + row; }
  std::size_t extra_index(int j) const { return extra_off_ + j; }

  double w(int layer, int row, int col) const { return data_[w_index(layer, row, col)]; }
  double b(int layer, int row) const { return data_[b_index(layer, row)]; }
  double beta(int layer, int row) const { return data_[beta_index(layer, row)]; }

  int n_extras() const { return static_cast<int>(extra_names_.size()); }
  const std::string& extra_name(int j) const { return extra_names_[j]; }
  double extra(int j) const { return data_[extra_off_ + j]; }
  double& extra(int j) { return data_[extra_off_ + j]; }
  int find_extra(const std::string& name) const;

  /// Appends a named trainable coefficient (must be called before training).
  void add_extra(const std::string& name, double init);

  /// Indices of every activation scale, for the L2 regularizer and the
  /// stationarity certificate.
  std::vector<std::size_t> beta_indices() const;

  /// Flat JSON checkpoint:
  /// {"layers":[{"W":[[...]],"b":[...],"beta":[...]}],"extra":{...}}
  std::string to_checkpoint_json() const;
  static ParamSet from_checkpoint_json(const std::string& text);

  bool operator==(const ParamSet& o) const = default;

 private:
  friend class Network;
  std::vector<double> data_;
  std::vector<int> layer_in_, layer_out_;
  std::vector<std::size_t> w_off_, b_off_, beta_off_;
  std::size_t extra_off_ = 0;
  bool has_betas_ = false;
  std::vector<std::string> extra_names_;

  void build_layout(const std::vector<int>& dims, bool betas);
};

}  // namespace stanpinn
