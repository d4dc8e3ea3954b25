#include "stanpinn/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stanpinn {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norminf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Minimizer of the cubic through (a0,f0,d0) and (a1,f1,d1), safeguarded to
// the interior of the bracket (N&W eq. 3.59).
double cubic_min(double a0, double f0, double d0, double a1, double f1, double d1) {
  const double lo = std::min(a0, a1), hi = std::max(a0, a1);
  const double bisect = 0.5 * (lo + hi);
  const double u = d0 + d1 - 3.0 * (f0 - f1) / (a0 - a1);
  const double disc = u * u - d0 * d1;
  if (!(disc >= 0.0)) return bisect;
  const double w = std::sqrt(disc) * (a1 >= a0 ? 1.0 : -1.0);
  const double denom = d1 - d0 + 2.0 * w;
  if (denom == 0.0) return bisect;
  double a = a1 - (a1 - a0) * (d1 + w - u) / denom;
  const double margin = 0.1 * (hi - lo);
  if (!(a >= lo + margin && a <= hi - margin)) a = bisect;
  return a;
}

struct Probe {
  double a = 0.0, f = 0.0, d = 0.0;
};

class LineSearch {
 public:
  LineSearch(std::span<const double> x, std::span<const double> dir, const LossFn& f,
             double f0, double dphi0, const LbfgsOptions& opt)
      : x_(x), dir_(dir), f_(f), f0_(f0), dphi0_(dphi0), opt_(opt),
        trial_(x.size()), g_trial_(x.size()), g_best_(x.size()), g_acc_(x.size()) {}

  int evals = 0;

  Probe eval(double a) {
    for (std::size_t i = 0; i < x_.size(); ++i) trial_[i] = x_[i] + a * dir_[i];
    std::fill(g_trial_.begin(), g_trial_.end(), 0.0);
    const double fv = f_(trial_, g_trial_);
    ++evals;
    Probe p{a, fv, dot(g_trial_, dir_)};
    if (armijo(p) && (!have_best_ || p.f < best_.f)) {
      best_ = p;
      have_best_ = true;
      g_best_ = g_trial_;
    }
    return p;
  }

  bool armijo(const Probe& p) const { return p.f <= f0_ + opt_.c1 * p.a * dphi0_; }
  bool strong(const Probe& p) const { return std::abs(p.d) <= -opt_.c2 * dphi0_; }

  /// Bracketing phase (N&W alg. 3.5) followed by zoom (alg. 3.6).
  bool run(Probe& out) {
    Probe prev{0.0, f0_, dphi0_};
    double a = opt_.init_step;
    bool first = true;
    while (evals < opt_.max_line_evals) {
      Probe p = eval(a);
      if (!std::isfinite(p.f)) {  // overshoot into overflow: shrink hard
        a *= 0.25;
        continue;
      }
      if (!armijo(p) || (!first && p.f >= prev.f)) return zoom(prev, p, out);
      if (strong(p)) {
        accept(p);
        out = p;
        return true;
      }
      if (p.d >= 0.0) return zoom(p, prev, out);
      prev = p;
      a = std::min(2.0 * a, 1e12);
      first = false;
    }
    return finish_with_best(out);
  }

  /// Best Armijo-satisfying probe seen, if any (budget exhaustion path).
  bool finish_with_best(Probe& out) {
    if (!have_best_) return false;
    g_acc_ = g_best_;
    out = best_;
    accepted_ = best_;
    return true;
  }

  const std::vector<double>& accepted_gradient() const { return g_acc_; }

 private:
  void accept(const Probe& p) {
    accepted_ = p;
    g_acc_ = g_trial_;
  }

  bool zoom(Probe lo, Probe hi, Probe& out) {
    while (evals < opt_.max_line_evals) {
      if (std::abs(hi.a - lo.a) < 1e-16 * std::max(1.0, std::abs(lo.a)))
        return finish_with_best(out);
      Probe p = eval(cubic_min(lo.a, lo.f, lo.d, hi.a, hi.f, hi.d));
      if (!armijo(p) || p.f >= lo.f) {
        hi = p;
      } else {
        if (strong(p)) {
          accept(p);
          out = p;
          return true;
        }
        if (p.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = p;
      }
    }
    return finish_with_best(out);
  }

  std::span<const double> x_, dir_;
  const LossFn& f_;
  double f0_, dphi0_;
  const LbfgsOptions& opt_;
  std::vector<double> trial_, g_trial_, g_best_, g_acc_;
  Probe best_, accepted_;
  bool have_best_ = false;
};

// Two-loop recursion reconstructing the quasi-Newton direction.
std::vector<double> two_loop(std::span<const double> g, const LbfgsState& st) {
  std::vector<double> q(g.begin(), g.end());
  const int m = static_cast<int>(st.pairs.size());
  std::vector<double> alpha(m, 0.0);
  for (int i = m - 1; i >= 0; --i) {
    const auto& p = st.pairs[i];
    alpha[i] = p.rho * dot(p.s, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * p.y[j];
  }
  if (m > 0) {
    const auto& newest = st.pairs[m - 1];
    const double gamma = dot(newest.s, newest.y) / dot(newest.y, newest.y);
    for (double& v : q) v *= gamma;
  }
  for (int i = 0; i < m; ++i) {
    const auto& p = st.pairs[i];
    const double beta = p.rho * dot(p.y, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha[i] - beta) * p.s[j];
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

LbfgsStepInfo lbfgs_step(std::vector<double>& x, const LossFn& f, LbfgsState& state,
                         const LbfgsOptions& opt) {
  LbfgsStepInfo info;
  std::vector<double> g0(x.size(), 0.0);
  const double f0 = f(x, g0);
  info.f0 = info.f1 = f0;
  info.evals = 1;
  info.grad_norm = norm2(g0);

  if (norminf(g0) <= opt.grad_tol) {
    state.converged = true;
    info.converged = true;
    return info;
  }

  std::vector<double> dir = two_loop(g0, state);
  double dphi0 = dot(dir, g0);
  if (!(dphi0 < 0.0)) {  // not a descent direction: restart from steepest descent
    state.pairs.clear();
    dir = g0;
    for (double& v : dir) v = -v;
    dphi0 = -dot(g0, g0);
  }

  LineSearch ls(x, dir, f, f0, dphi0, opt);
  Probe acc;
  std::vector<double> x_new(x.size());
  std::vector<double> g_new;

  if (ls.run(acc)) {
    info.accepted_wolfe = true;
    info.f1 = acc.f;
    for (std::size_t i = 0; i < x.size(); ++i) x_new[i] = x[i] + acc.a * dir[i];
    g_new = ls.accepted_gradient();
    info.evals += ls.evals;
  } else {
    // no sufficient-decrease point found within budget
    info.used_fallback = true;
    state.fallbacks += 1;
    for (std::size_t i = 0; i < x.size(); ++i) x_new[i] = x[i] - opt.fallback_step * g0[i];
    g_new.assign(x.size(), 0.0);
    info.f1 = f(x_new, g_new);
    info.evals += ls.evals + 1;
  }

  std::vector<double> s(x.size()), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    s[i] = x_new[i] - x[i];
    y[i] = g_new[i] - g0[i];
  }
  const double sy = dot(s, y);
  if (sy > opt.curvature_min) {
    state.pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
    while (static_cast<int>(state.pairs.size()) > opt.history) state.pairs.pop_front();
  }

  x = std::move(x_new);
  state.iterations += 1;
  return info;
}

MinimizeResult lbfgs_minimize(std::vector<double>& x, const LossFn& f, const LbfgsOptions& opt,
                              int max_iters, double gtol, double ftol) {
  LbfgsState st;
  MinimizeResult res;
  for (int it = 0; it < max_iters; ++it) {
    LbfgsStepInfo info = lbfgs_step(x, f, st, opt);
    res.f = info.f1;
    res.grad_norm = info.grad_norm;
    res.iterations = it + 1;
    res.fallbacks = st.fallbacks;
    if (info.converged) break;
    if (info.grad_norm < gtol) break;
    if (info.f1 < ftol) break;
  }
  return res;
}

}  // namespace stanpinn
