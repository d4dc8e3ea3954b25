#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stanpinn {

/// Raised when an operation produces a non-finite value; the message names
/// the offending operation so training aborts carry a usable diagnostic.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar that is either tracked on a tape (idx >= 0) or a plain constant.
/// Constants never touch the tape and carry no derivative structure.
struct Sc {
  int32_t idx = -1;
  double v = 0.0;

  bool tracked() const { return idx >= 0; }
};

inline Sc sc_const(double v) { return Sc{-1, v}; }

/// Append-only record of scalar operations. Each node stores up to three
/// parent indices with the numeric partial derivative of the node's value
/// with respect to each parent, evaluated at the recorded point. A reverse
/// sweep therefore needs no knowledge of the operation that produced a node:
/// it just multiplies adjoints through the stored partials.
///
/// Nodes are topologically ordered by construction (parents always precede
/// children), so one backward pass over the node array from an output seed
/// of 1.0 yields adjoints for every node, leaves included.
class Tape {
 public:
  struct Node {
    int32_t a, b, c;
    double pa, pb, pc;
  };

  explicit Tape(std::size_t reserve = 1 << 14) { nodes_.reserve(reserve); }

  std::size_t size() const { return nodes_.size(); }
  double value(Sc s) const { return s.v; }

  /// Drops every node recorded after position n. Used to rewind a context
  /// back to its parameter leaves between collocation points.
  void truncate(std::size_t n) { nodes_.resize(n); }

  /// When false, jet operations skip the second-derivative component
  /// entirely (first-order-only passes, e.g. du/dt in the heat residual).
  bool track_second = true;

  Sc leaf(double v) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in leaf registration");
    return push(v, -1, 0.0, -1, 0.0, -1, 0.0);
  }

  // -- elementary scalar records (constants fold, never recorded) --

  Sc add(Sc x, Sc y) {
    if (!x.tracked() && !y.tracked()) return sc_const(x.v + y.v);
    if (!x.tracked()) return x.v == 0.0 ? y : rec1("add", y.v + x.v, y, 1.0);
    if (!y.tracked()) return y.v == 0.0 ? x : rec1("add", x.v + y.v, x, 1.0);
    return rec2("add", x.v + y.v, x, 1.0, y, 1.0);
  }

  Sc sub(Sc x, Sc y) {
    if (!x.tracked() && !y.tracked()) return sc_const(x.v - y.v);
    if (!y.tracked()) return y.v == 0.0 ? x : rec1("sub", x.v - y.v, x, 1.0);
    if (!x.tracked()) return rec1("sub", x.v - y.v, y, -1.0);
    return rec2("sub", x.v - y.v, x, 1.0, y, -1.0);
  }

  Sc mul(Sc x, Sc y) {
    if (!x.tracked() && !y.tracked()) return sc_const(x.v * y.v);
    if (!x.tracked()) return scale(y, x.v);
    if (!y.tracked()) return scale(x, y.v);
    return rec2("mul", x.v * y.v, x, y.v, y, x.v);
  }

  /// k*x*y with a constant k folded into the partials.
  Sc mul_k(Sc x, Sc y, double k) {
    if (k == 0.0) return sc_const(0.0);
    if (!x.tracked() && !y.tracked()) return sc_const(k * x.v * y.v);
    if (!x.tracked()) return scale(y, k * x.v);
    if (!y.tracked()) return scale(x, k * y.v);
    return rec2("mul", k * x.v * y.v, x, k * y.v, y, k * x.v);
  }

  /// x*y + z fused into a single node where possible.
  Sc fma(Sc x, Sc y, Sc z) { return fma_k(1.0, x, y, z); }

  /// k*x*y + z.
  Sc fma_k(double k, Sc x, Sc y, Sc z) {
    if (k == 0.0 || (!x.tracked() && x.v == 0.0) || (!y.tracked() && y.v == 0.0)) return z;
    if (!x.tracked() && !y.tracked()) return add(z, sc_const(k * x.v * y.v));
    if (!x.tracked()) return axpy(k * x.v, y, z);
    if (!y.tracked()) return axpy(k * y.v, x, z);
    if (!z.tracked())
      return rec2("fma", k * x.v * y.v + z.v, x, k * y.v, y, k * x.v);
    return rec3("fma", k * x.v * y.v + z.v, x, k * y.v, y, k * x.v, z, 1.0);
  }

  /// a*x + z with constant a and tracked x.
  Sc axpy(double a, Sc x, Sc z) {
    if (a == 0.0) return z;
    if (!z.tracked()) return rec1("fma", a * x.v + z.v, x, a);
    if (a == 1.0) return rec2("add", x.v + z.v, x, 1.0, z, 1.0);
    return rec2("fma", a * x.v + z.v, x, a, z, 1.0);
  }

  /// k*x + c.
  Sc affine(Sc x, double k, double c) {
    if (!x.tracked()) return sc_const(k * x.v + c);
    if (k == 0.0) return sc_const(c);
    if (k == 1.0 && c == 0.0) return x;
    return rec1("affine", k * x.v + c, x, k);
  }

  Sc scale(Sc x, double k) { return affine(x, k, 0.0); }
  Sc neg(Sc x) { return affine(x, -1.0, 0.0); }

  Sc tanh_(Sc x) {
    if (!x.tracked()) return sc_const(std::tanh(x.v));
    const double t = std::tanh(x.v);
    return rec1("tanh", t, x, 1.0 - t * t);
  }

  Sc exp_(Sc x) {
    if (!x.tracked()) return sc_const(std::exp(x.v));
    const double e = std::exp(x.v);
    return rec1("exp", e, x, e);
  }

  Sc sin_(Sc x) {
    if (!x.tracked()) return sc_const(std::sin(x.v));
    return rec1("sin", std::sin(x.v), x, std::cos(x.v));
  }

  Sc cos_(Sc x) {
    if (!x.tracked()) return sc_const(std::cos(x.v));
    return rec1("cos", std::cos(x.v), x, -std::sin(x.v));
  }

  Sc rec1(const char* op, double v, Sc a, double pa) {
    check(op, v);
    return push(v, a.idx, pa, -1, 0.0, -1, 0.0);
  }

  Sc rec2(const char* op, double v, Sc a, double pa, Sc b, double pb) {
    check(op, v);
    return push(v, a.idx, pa, b.idx, pb, -1, 0.0);
  }

  Sc rec3(const char* op, double v, Sc a, double pa, Sc b, double pb, Sc c, double pc) {
    check(op, v);
    return push(v, a.idx, pa, b.idx, pb, c.idx, pc);
  }

  /// Accumulates seed * d(s)/d(node_i) into grad[i] for every i < grad.size().
  /// By convention the first grad.size() tape entries are the parameter
  /// leaves of the evaluation context. Returns false (grad untouched) when s
  /// is a constant, i.e. nothing on the tape feeds it.
  ///
  /// The tape is left intact; repeated sweeps of the same tape are
  /// deterministic and bitwise identical.
  bool sweep_accumulate(Sc s, double seed, std::span<double> grad) {
    if (!s.tracked()) return false;
    const std::size_t top = static_cast<std::size_t>(s.idx);
    adj_.resize(nodes_.size());
    std::fill(adj_.begin(), adj_.begin() + top + 1, 0.0);
    adj_[top] = seed;
    for (std::size_t i = top + 1; i-- > 0;) {
      const double a = adj_[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.a >= 0) adj_[n.a] += a * n.pa;
      if (n.b >= 0) adj_[n.b] += a * n.pb;
      if (n.c >= 0) adj_[n.c] += a * n.pc;
    }
    const std::size_t m = std::min(grad.size(), top + 1);
    for (std::size_t i = 0; i < m; ++i) grad[i] += adj_[i];
    return true;
  }

 private:
  Sc push(double v, int32_t a, double pa, int32_t b, double pb, int32_t c, double pc) {
    const int32_t idx = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(Node{a, b, c, pa, pb, pc});
    return Sc{idx, v};
  }

  void check(const char* op, double v) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite result in operation '") + op + "'");
    }
  }

  std::vector<Node> nodes_;
  std::vector<double> adj_;
};

}  // namespace stanpinn
