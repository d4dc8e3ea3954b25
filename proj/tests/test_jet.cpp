#include <doctest.h>

#include <cmath>
#include <vector>

#include "fd.hpp"
#include "stanpinn/jet.hpp"
#include "stanpinn/rng.hpp"

using namespace stanpinn;

namespace {

// Random expression trees over the elementary op set, evaluated twice:
// once through the jet/tape machinery and once in plain doubles. The plain
// path is the oracle for all finite-difference comparisons.
struct Expr {
  enum Kind { X, Param, Const, Add, Mul, Tanh, Exp, Sin, Cos, Pow } kind;
  int a = -1, b = -1;
  double cval = 0.0;
  int param = 0;
  int pw = 0;
};

struct ExprTree {
  std::vector<Expr> nodes;
  int root = 0;
  int n_params = 0;
};

double eval_plain(const ExprTree& tr, int id, double x, std::span<const double> th) {
  const Expr& e = tr.nodes[id];
  switch (e.kind) {
    case Expr::X: return x;
    case Expr::Param: return th[e.param];
    case Expr::Const: return e.cval;
    case Expr::Add: return eval_plain(tr, e.a, x, th) + eval_plain(tr, e.b, x, th);
    case Expr::Mul: return eval_plain(tr, e.a, x, th) * eval_plain(tr, e.b, x, th);
    case Expr::Tanh: return std::tanh(eval_plain(tr, e.a, x, th));
    case Expr::Exp: return std::exp(eval_plain(tr, e.a, x, th));
    case Expr::Sin: return std::sin(eval_plain(tr, e.a, x, th));
    case Expr::Cos: return std::cos(eval_plain(tr, e.a, x, th));
    case Expr::Pow: return std::pow(eval_plain(tr, e.a, x, th), e.pw);
  }
  return 0.0;
}

DiffValue eval_jet(const ExprTree& tr, int id, Tape& t, const DiffValue& xj,
                   std::span<const DiffValue> pj) {
  const Expr& e = tr.nodes[id];
  DiffValue args[2];
  if (e.a >= 0) args[0] = eval_jet(tr, e.a, t, xj, pj);
  if (e.b >= 0) args[1] = eval_jet(tr, e.b, t, xj, pj);
  switch (e.kind) {
    case Expr::X: return xj;
    case Expr::Param: return pj[e.param];
    case Expr::Const: return lift_const(e.cval);
    case Expr::Add: return elementary(t, ElemOp::Add, {args, 2});
    case Expr::Mul: return elementary(t, ElemOp::Mul, {args, 2});
    case Expr::Tanh: return elementary(t, ElemOp::Tanh, {args, 1});
    case Expr::Exp: return elementary(t, ElemOp::Exp, {args, 1});
    case Expr::Sin: return elementary(t, ElemOp::Sin, {args, 1});
    case Expr::Cos: return elementary(t, ElemOp::Cos, {args, 1});
    case Expr::Pow: return elementary(t, ElemOp::Pow, {args, 1}, e.pw);
  }
  return {};
}

int gen_expr(ExprTree& tr, Rng& rng, int depth) {
  Expr e;
  const double roll = rng.uniform01();
  if (depth <= 0 || roll < 0.25) {
    const double leaf = rng.uniform01();
    if (leaf < 0.45) {
      e.kind = Expr::X;
    } else if (leaf < 0.8 && tr.n_params > 0) {
      e.kind = Expr::Param;
      e.param = static_cast<int>(rng.below(tr.n_params));
    } else {
      e.kind = Expr::Const;
      e.cval = rng.uniform(-2.0, 2.0);
    }
  } else {
    const double op = rng.uniform01();
    if (op < 0.25) e.kind = Expr::Add;
    else if (op < 0.5) e.kind = Expr::Mul;
    else if (op < 0.65) e.kind = Expr::Tanh;
    else if (op < 0.75) e.kind = Expr::Exp;
    else if (op < 0.85) e.kind = Expr::Sin;
    else if (op < 0.95) e.kind = Expr::Cos;
    else {
      e.kind = Expr::Pow;
      e.pw = static_cast<int>(rng.below(4));  // 0..3
    }
    e.a = gen_expr(tr, rng, depth - 1);
    if (e.kind == Expr::Add || e.kind == Expr::Mul) e.b = gen_expr(tr, rng, depth - 1);
  }
  tr.nodes.push_back(e);
  return static_cast<int>(tr.nodes.size()) - 1;
}

// Rejects trees whose plain values explode near the probe point, judged from
// the oracle side only.
bool tame(const ExprTree& tr, double x, std::span<const double> th) {
  for (double dx : {-1e-3, 0.0, 1e-3}) {
    const double v = eval_plain(tr, tr.root, x + dx, th);
    if (!std::isfinite(v) || std::abs(v) > 50.0) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("jet");

TEST_CASE("input seeding follows the definition") {
  Tape t;
  DiffValue v = lift_input(t, 3.0, 1.0);
  CHECK(v.val.v == 3.0);
  CHECK(v.d1.v == 1.0);
  CHECK(v.d2.v == 0.0);

  DiffValue passenger = lift_input(t, 0.5, 0.0);
  CHECK(passenger.val.v == 0.5);
  CHECK(passenger.d1.v == 0.0);
  CHECK(passenger.d2.v == 0.0);

  CHECK_THROWS_AS(lift_input(t, std::nan(""), 1.0), NumericError);
}

TEST_CASE("square of a seeded input has curvature two") {
  Tape t;
  DiffValue x = lift_input(t, -5.0, 1.0);
  DiffValue sq = jmul(t, x, x);
  CHECK(sq.val.v == 25.0);
  CHECK(sq.d1.v == -10.0);
  CHECK(sq.d2.v == 2.0);
}

TEST_CASE("tanh and sin at zero") {
  Tape t;
  DiffValue x = lift_input(t, 0.0, 1.0);
  DiffValue th = jtanh(t, x);
  CHECK(th.val.v == 0.0);
  CHECK(th.d1.v == 1.0);
  CHECK(th.d2.v == 0.0);
  DiffValue s = jsin(t, x);
  CHECK(s.val.v == 0.0);
  CHECK(s.d1.v == 1.0);
  CHECK(s.d2.v == 0.0);
}

TEST_CASE("tanh slope at one matches the finite-difference oracle") {
  Tape t;
  DiffValue th = jtanh(t, lift_input(t, 1.0, 1.0));
  const double want = fd::central1([](double x) { return std::tanh(x); }, 1.0, 1e-6);
  CHECK(fd::rel_err(th.d1.v, want) < 1e-6);
  CHECK(th.d1.v == doctest::Approx(0.41997434161402614).epsilon(1e-12));
}

TEST_CASE("reverse sweep of the slope recovers the parameter sensitivity") {
  // output = theta*x; d(d(theta x)/dx)/dtheta = 1
  Tape t;
  Sc theta = t.leaf(2.5);
  DiffValue x = lift_input(t, 0.8, 1.0);
  DiffValue out = jmul(t, lift_param(theta), x);
  SweepResult r = reverse_sweep(t, out, JetSelect::D1, 1);
  CHECK(r.seeded);
  CHECK(r.grad[0] == 1.0);
}

TEST_CASE("constant outputs sweep to zero with a warning flag") {
  Tape t;
  t.leaf(1.0);
  DiffValue c = lift_const(7.0);
  SweepResult r = reverse_sweep(t, c, JetSelect::Primal, 1);
  CHECK(!r.seeded);
  CHECK(r.grad[0] == 0.0);

  // d1 selected on an unseeded evaluation: also zero + flag
  DiffValue x = lift_input(t, 0.5, 0.0);
  DiffValue y = jtanh(t, x);
  SweepResult r2 = reverse_sweep(t, y, JetSelect::D1, 1);
  CHECK(!r2.seeded);
}

TEST_CASE("order-1 mode truncates the second derivative") {
  Tape t;
  t.track_second = false;
  DiffValue x = lift_input(t, 0.7, 1.0);
  DiffValue y = jtanh(t, jmul(t, x, x));
  CHECK(y.d2.v == 0.0);
  CHECK(!y.d2.tracked());
  CHECK(y.d1.v == doctest::Approx(2 * 0.7 * (1 - std::pow(std::tanh(0.49), 2))));
}

TEST_CASE("random expressions: jets match finite differences of the plain oracle") {
  Rng master(20240817);
  int tested = 0;
  while (tested < 60) {
    ExprTree tr;
    tr.n_params = 3;
    Rng rng(master.next());
    tr.root = gen_expr(tr, rng, 4);
    const double x0 = rng.uniform(-1.5, 1.5);
    std::vector<double> th = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                              rng.uniform(-1.5, 1.5)};
    if (!tame(tr, x0, th)) continue;
    ++tested;

    Tape t;
    std::vector<DiffValue> pj;
    for (double v : th) pj.push_back(lift_param(t.leaf(v)));
    DiffValue xj = lift_input(t, x0, 1.0);
    DiffValue out = eval_jet(tr, tr.root, t, xj, pj);

    auto at_x = [&](double x) { return eval_plain(tr, tr.root, x, th); };
    CHECK(out.val.v == doctest::Approx(at_x(x0)).epsilon(1e-12));
    CHECK(fd::rel_err(out.d1.v, fd::central1(at_x, x0, 1e-5)) < 1e-6);
    CHECK(fd::rel_err(out.d2.v, fd::central2(at_x, x0, 1e-4)) < 1e-4);

    // reverse over the primal vs finite differences in each parameter
    SweepResult g = reverse_sweep(t, out, JetSelect::Primal, th.size());
    for (std::size_t i = 0; i < th.size(); ++i) {
      auto at_th = [&](double v) {
        std::vector<double> tt = th;
        tt[i] = v;
        return eval_plain(tr, tr.root, x0, tt);
      };
      CHECK(fd::rel_err(g.grad[i], fd::central1(at_th, th[i], 1e-6)) < 1e-6);
    }
  }
}

TEST_CASE("reverse sweep of d2 matches parameter differences of the curvature") {
  // third-order mixed derivative: d/dtheta of d2(f); the d2 quantity at
  // perturbed parameters is recomputed through fresh tapes.
  Rng master(77);
  int tested = 0;
  while (tested < 20) {
    ExprTree tr;
    tr.n_params = 2;
    Rng rng(master.next());
    tr.root = gen_expr(tr, rng, 3);
    const double x0 = rng.uniform(-1.0, 1.0);
    std::vector<double> th = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    if (!tame(tr, x0, th)) continue;

    Tape t;
    std::vector<DiffValue> pj;
    for (double v : th) pj.push_back(lift_param(t.leaf(v)));
    DiffValue out = eval_jet(tr, tr.root, t, lift_input(t, x0, 1.0), pj);
    if (!out.d2.tracked()) continue;  // expression without parameter-coupled curvature
    ++tested;
    SweepResult g = reverse_sweep(t, out, JetSelect::D2, th.size());

    for (std::size_t i = 0; i < th.size(); ++i) {
      auto f = [&](double v) {
        std::vector<double> tt = th;
        tt[i] = v;
        Tape local;
        std::vector<DiffValue> lp;
        for (double w : tt) lp.push_back(lift_param(local.leaf(w)));
        return eval_jet(tr, tr.root, local, lift_input(local, x0, 1.0), lp).d2.v;
      };
      CHECK(fd::rel_err(g.grad[i], fd::central1(f, th[i], 1e-4)) < 1e-4);
    }
  }
}

TEST_CASE("pow reduces to repeated multiplication") {
  Tape t;
  DiffValue x = lift_input(t, 1.3, 1.0);
  DiffValue p3 = jpow(t, x, 3);
  CHECK(p3.val.v == doctest::Approx(1.3 * 1.3 * 1.3).epsilon(1e-15));
  CHECK(p3.d1.v == doctest::Approx(3 * 1.3 * 1.3).epsilon(1e-14));
  CHECK(p3.d2.v == doctest::Approx(6 * 1.3).epsilon(1e-14));
  CHECK(jpow(t, x, 0).val.v == 1.0);
  CHECK(jpow(t, x, 1).val.v == x.val.v);
  CHECK_THROWS_AS(jpow(t, x, -2), std::invalid_argument);
}

TEST_SUITE_END();
