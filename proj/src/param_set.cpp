#include "stanpinn/param_set.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "stanpinn/rng.hpp"

namespace stanpinn {

void NetConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("NetConfig: dims must be >= 1");
  if (hidden_widths.empty()) throw std::invalid_argument("NetConfig: depth must be >= 2");
  for (int w : hidden_widths)
    if (w < 1) throw std::invalid_argument("NetConfig: widths must be >= 1");
}

void ParamSet::build_layout(const std::vector<int>& dims, bool betas) {
  has_betas_ = betas;
  const int n_layers = static_cast<int>(dims.size()) - 1;
  std::size_t off = 0;
  for (int k = 0; k < n_layers; ++k) {
    layer_in_.push_back(dims[k]);
    layer_out_.push_back(dims[k + 1]);
    w_off_.push_back(off);
    off += static_cast<std::size_t>(dims[k]) * dims[k + 1];
    b_off_.push_back(off);
    off += dims[k + 1];
    beta_off_.push_back(off);
    if (betas && k < n_layers - 1) off += dims[k + 1];  // hidden layers only
  }
  extra_off_ = off;
  data_.assign(off, 0.0);
}

ParamSet ParamSet::init(const NetConfig& cfg) {
  cfg.validate();
  std::vector<int> dims;
  dims.push_back(cfg.input_dim);
  for (int w : cfg.hidden_widths) dims.push_back(w);
  dims.push_back(cfg.output_dim);

  ParamSet p;
  p.build_layout(dims, has_scale(cfg.activation));

  Rng rng(cfg.seed);
  for (int k = 0; k < p.n_layers(); ++k) {
    const double limit = std::sqrt(6.0 / (p.layer_in(k) + p.layer_out(k)));
    for (int r = 0; r < p.layer_out(k); ++r)
      for (int c = 0; c < p.layer_in(k); ++c)
        p.data_[p.w_index(k, r, c)] = rng.uniform(-limit, limit);
    // biases stay zero
    if (p.has_betas_ && k < p.n_layers() - 1)
      for (int r = 0; r < p.layer_out(k); ++r) p.data_[p.beta_index(k, r)] = cfg.beta_init;
  }
  return p;
}

void ParamSet::set_flat(std::span<const double> v) {
  if (v.size() != data_.size())
    throw std::invalid_argument("ParamSet::set_flat: length mismatch");
  std::copy(v.begin(), v.end(), data_.begin());
}

int ParamSet::find_extra(const std::string& name) const {
  for (int j = 0; j < n_extras(); ++j)
    if (extra_names_[j] == name) return j;
  return -1;
}

void ParamSet::add_extra(const std::string& name, double init) {
  extra_names_.push_back(name);
  data_.push_back(init);
}

std::vector<std::size_t> ParamSet::beta_indices() const {
  std::vector<std::size_t> out;
  if (!has_betas_) return out;
  for (int k = 0; k + 1 < n_layers(); ++k)
    for (int r = 0; r < layer_out(k); ++r) out.push_back(beta_index(k, r));
  return out;
}

std::string ParamSet::to_checkpoint_json() const {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (int k = 0; k < n_layers(); ++k) {
    nlohmann::json layer;
    auto& W = layer["W"] = nlohmann::json::array();
    for (int r = 0; r < layer_out(k); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < layer_in(k); ++c) row.push_back(w(k, r, c));
      W.push_back(std::move(row));
    }
    auto& bj = layer["b"] = nlohmann::json::array();
    for (int r = 0; r < layer_out(k); ++r) bj.push_back(b(k, r));
    auto& betaj = layer["beta"] = nlohmann::json::array();
    if (has_betas_ && k + 1 < n_layers())
      for (int r = 0; r < layer_out(k); ++r) betaj.push_back(beta(k, r));
    j["layers"].push_back(std::move(layer));
  }
  auto& extra = j["extra"] = nlohmann::json::object();
  for (int e = 0; e < n_extras(); ++e) extra[extra_names_[e]] = this->extra(e);
  return j.dump();
}

ParamSet ParamSet::from_checkpoint_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty())
    throw std::invalid_argument("checkpoint: missing layers");
  const auto& layers = j["layers"];

  std::vector<int> dims;
  bool betas = false;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& L = layers[k];
    if (!L.contains("W") || !L["W"].is_array() || L["W"].empty())
      throw std::invalid_argument("checkpoint: layer missing W");
    const int out = static_cast<int>(L["W"].size());
    const int in = static_cast<int>(L["W"][0].size());
    if (k == 0) dims.push_back(in);
    if (dims.back() != in)
      throw std::invalid_argument("checkpoint: layer dimensions do not chain");
    dims.push_back(out);
    if (L.contains("beta") && !L["beta"].empty()) betas = true;
  }

  ParamSet p;
  p.build_layout(dims, betas);
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& L = layers[k];
    const auto& W = L["W"];
    for (int r = 0; r < p.layer_out(k); ++r) {
      if (static_cast<int>(W[r].size()) != p.layer_in(k))
        throw std::invalid_argument("checkpoint: ragged weight row");
      for (int c = 0; c < p.layer_in(k); ++c)
        p.data_[p.w_index(k, r, c)] = W[r][c].get<double>();
    }
    const auto& bj = L.at("b");
    if (static_cast<int>(bj.size()) != p.layer_out(k))
      throw std::invalid_argument("checkpoint: bias length mismatch");
    for (int r = 0; r < p.layer_out(k); ++r) p.data_[p.b_index(k, r)] = bj[r].get<double>();
    if (betas && k + 1 < layers.size()) {
      const auto& betaj = L.at("beta");
      if (static_cast<int>(betaj.size()) != p.layer_out(k))
        throw std::invalid_argument("checkpoint: beta length mismatch");
      for (int r = 0; r < p.layer_out(k); ++r)
        p.data_[p.beta_index(k, r)] = betaj[r].get<double>();
    }
  }
  if (j.contains("extra"))
    for (auto& [key, val] : j["extra"].items()) p.add_extra(key, val.get<double>());
  return p;
}

}  // namespace stanpinn
