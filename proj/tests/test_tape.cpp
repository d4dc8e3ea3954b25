#include <doctest.h>

#include <cmath>

#include "fd.hpp"
#include "stanpinn/tape.hpp"

using namespace stanpinn;

TEST_SUITE_BEGIN("tape");

TEST_CASE("constants fold and never touch the tape") {
  Tape t;
  Sc a = sc_const(2.0), b = sc_const(3.0);
  Sc s = t.add(a, b);
  CHECK(!s.tracked());
  CHECK(s.v == 5.0);
  CHECK(t.mul(a, b).v == 6.0);
  CHECK(t.tanh_(sc_const(0.0)).v == 0.0);
  CHECK(t.size() == 0);
}

TEST_CASE("identity folds avoid new nodes") {
  Tape t;
  Sc x = t.leaf(4.0);
  const std::size_t base = t.size();
  CHECK(t.add(x, sc_const(0.0)).idx == x.idx);
  CHECK(t.mul(x, sc_const(1.0)).idx == x.idx);
  CHECK(t.fma_k(0.0, x, x, x).idx == x.idx);
  CHECK(t.size() == base);
}

TEST_CASE("single-node partials match hand calculus") {
  Tape t;
  Sc x = t.leaf(0.7);

  auto grad_of = [&](Sc out) {
    std::vector<double> g(1, 0.0);
    t.sweep_accumulate(out, 1.0, g);
    return g[0];
  };

  CHECK(grad_of(t.tanh_(x)) == doctest::Approx(1.0 - std::tanh(0.7) * std::tanh(0.7)).epsilon(1e-15));
  CHECK(grad_of(t.exp_(x)) == doctest::Approx(std::exp(0.7)).epsilon(1e-15));
  CHECK(grad_of(t.sin_(x)) == doctest::Approx(std::cos(0.7)).epsilon(1e-15));
  CHECK(grad_of(t.cos_(x)) == doctest::Approx(-std::sin(0.7)).epsilon(1e-15));
  CHECK(grad_of(t.mul(x, x)) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(grad_of(t.affine(x, -2.5, 1.0)) == doctest::Approx(-2.5).epsilon(1e-15));
}

TEST_CASE("fused multiply-add gradients") {
  Tape t;
  Sc x = t.leaf(1.5);
  Sc y = t.leaf(-2.0);
  Sc z = t.leaf(0.25);
  Sc r = t.fma_k(3.0, x, y, z);  // 3xy + z
  CHECK(r.v == doctest::Approx(3.0 * 1.5 * -2.0 + 0.25));
  std::vector<double> g(3, 0.0);
  t.sweep_accumulate(r, 1.0, g);
  CHECK(g[0] == doctest::Approx(-6.0));  // 3y
  CHECK(g[1] == doctest::Approx(4.5));   // 3x
  CHECK(g[2] == doctest::Approx(1.0));
}

TEST_CASE("repeated sweeps are bitwise identical and leave the tape intact") {
  Tape t;
  Sc x = t.leaf(0.3);
  Sc y = t.leaf(-1.2);
  Sc e = t.mul(t.tanh_(t.mul(x, y)), t.exp_(t.sin_(x)));
  const std::size_t n = t.size();

  std::vector<double> g1(2, 0.0), g2(2, 0.0);
  t.sweep_accumulate(e, 1.0, g1);
  t.sweep_accumulate(e, 1.0, g2);
  CHECK(t.size() == n);
  CHECK(g1[0] == g2[0]);
  CHECK(g1[1] == g2[1]);
}

TEST_CASE("truncate rewinds recorded work") {
  Tape t;
  t.leaf(1.0);
  t.leaf(2.0);
  const std::size_t leaves = t.size();
  Sc x{0, 1.0};
  for (int i = 0; i < 10; ++i) x = t.mul(x, x);
  CHECK(t.size() > leaves);
  t.truncate(leaves);
  CHECK(t.size() == leaves);
}

TEST_CASE("non-finite results abort with the operation name") {
  Tape t;
  Sc big = t.leaf(1e308);
  CHECK_THROWS_WITH_AS(t.add(big, big), doctest::Contains("add"), NumericError);
  Sc x = t.leaf(1000.0);
  CHECK_THROWS_WITH_AS(t.exp_(x), doctest::Contains("exp"), NumericError);
  CHECK_THROWS_AS(t.leaf(std::nan("")), NumericError);
}

TEST_CASE("sweep from a constant reports unseeded") {
  Tape t;
  t.leaf(1.0);
  std::vector<double> g(1, 0.0);
  CHECK(!t.sweep_accumulate(sc_const(5.0), 1.0, g));
  CHECK(g[0] == 0.0);
}

TEST_SUITE_END();
