#pragma once

// Finite-difference oracles. These stay independent of the tape/jet
// implementation: they only ever call plain double-valued functions.

#include <algorithm>
#include <cmath>
#include <functional>

namespace fd {

using Fn = std::function<double(double)>;

inline double central1(const Fn& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double central2(const Fn& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Relative error with a unit floor so near-zero quantities are compared
// absolutely instead of blowing up the ratio.
inline double rel_err(double a, double b, double floor_ = 1.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor_});
}

}  // namespace fd
