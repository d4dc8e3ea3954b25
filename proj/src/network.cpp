#include "stanpinn/network.hpp"

#include <string>

namespace stanpinn {

std::vector<DiffValue> Network::forward(EvalContext& ctx, const ParamSet& p,
                                        std::span<const DiffValue> input) const {
  if (static_cast<int>(input.size()) != cfg_.input_dim)
    throw std::invalid_argument("forward: input length does not match config");
  if (has_scale(cfg_.activation) != p.has_betas())
    throw std::invalid_argument("forward: parameter set does not match activation kind");
  Tape& t = ctx.tape;
  std::vector<DiffValue> cur(input.begin(), input.end());
  std::vector<DiffValue> nxt;
  const int D = p.n_layers();
  for (int k = 0; k < D; ++k) {
    nxt.assign(p.layer_out(k), DiffValue{});
    try {
      for (int r = 0; r < p.layer_out(k); ++r) {
        DiffValue acc = lift_param(ctx.param(p, p.b_index(k, r)));
        for (int c = 0; c < p.layer_in(k); ++c) {
          DiffValue w = lift_param(ctx.param(p, p.w_index(k, r, c)));
          acc = jmuladd(t, w, cur[c], acc);
        }
        if (k < D - 1) {
          DiffValue beta = p.has_betas()
                               ? lift_param(ctx.param(p, p.beta_index(k, r)))
                               : lift_const(0.0);
          acc = activate(t, cfg_.activation, acc, beta);
        }
        nxt[r] = acc;
      }
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at layer " + std::to_string(k));
    }
    cur.swap(nxt);
  }
  return cur;
}

DiffValue Network::eval(EvalContext& ctx, const ParamSet& p, std::span<const double> x,
                        int seed_dim, int order) const {
  Tape& t = ctx.tape;
  const bool prev_order2 = t.track_second;
  t.track_second = order >= 2;
  std::vector<DiffValue> in(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double w = (order >= 1 && static_cast<int>(d) == seed_dim) ? 1.0 : 0.0;
    in[d] = lift_input(t, x[d], w);
  }
  DiffValue out = forward(ctx, p, in)[0];
  t.track_second = prev_order2;
  return out;
}

double Network::value(const ParamSet& p, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cfg_.input_dim)
    throw std::invalid_argument("value: input length does not match config");
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> nxt;
  const int D = p.n_layers();
  for (int k = 0; k < D; ++k) {
    nxt.assign(p.layer_out(k), 0.0);
    for (int r = 0; r < p.layer_out(k); ++r) {
      double a = p.b(k, r);
      for (int c = 0; c < p.layer_in(k); ++c) a += p.w(k, r, c) * cur[c];
      if (k < D - 1) {
        const double th = std::tanh(a);
        switch (cfg_.activation) {
          case ActivationKind::Tanh: a = th; break;
          case ActivationKind::NLaaf: a = std::tanh(p.beta(k, r) * a); break;
          case ActivationKind::Stan: a = th + p.beta(k, r) * a * th; break;
        }
      }
      nxt[r] = a;
    }
    cur.swap(nxt);
  }
  return cur[0];
}

std::size_t Network::param_count() const {
  return ParamSet::init(cfg_).size();
}

}  // namespace stanpinn
