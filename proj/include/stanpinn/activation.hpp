#pragma once

#include <stdexcept>
#include <string>

#include "stanpinn/jet.hpp"

namespace stanpinn {

/// Hidden-layer activation family. NLaaf and Stan carry one trainable scale
/// per hidden neuron; Tanh carries none.
enum class ActivationKind { Tanh, NLaaf, Stan };

inline bool has_scale(ActivationKind k) { return k != ActivationKind::Tanh; }

inline const char* activation_name(ActivationKind k) {
  switch (k) {
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::NLaaf: return "nlaaf";
    case ActivationKind::Stan: return "stan";
  }
  return "?";
}

inline ActivationKind activation_from_name(const std::string& s) {
  if (s == "tanh") return ActivationKind::Tanh;
  if (s == "nlaaf") return ActivationKind::NLaaf;
  if (s == "stan") return ActivationKind::Stan;
  throw std::invalid_argument("unknown activation '" + s + "' (known: tanh, nlaaf, stan)");
}

/// Applies the activation to a pre-activation jet. beta is the neuron's
/// trainable scale (it participates in the tape, so gradients reach it);
/// ignored for Tanh.
///
///   Tanh:  tanh(x)
///   NLaaf: tanh(beta * x)
///   Stan:  tanh(x) + beta * x * tanh(x)
inline DiffValue activate(Tape& t, ActivationKind kind, DiffValue x, DiffValue beta) {
  switch (kind) {
    case ActivationKind::Tanh:
      return jtanh(t, x);
    case ActivationKind::NLaaf:
      return jtanh(t, jmul(t, beta, x));
    case ActivationKind::Stan: {
      DiffValue th = jtanh(t, x);
      DiffValue xth = jmul(t, x, th);
      return jmuladd(t, beta, xth, th);
    }
  }
  throw std::invalid_argument("activate: unknown kind");
}

}  // namespace stanpinn
