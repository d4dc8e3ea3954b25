#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace stanpinn {

/// Evaluates loss and gradient at x; returns the loss.
using LossFn = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
  int history = 10;            // ring capacity M
  double c1 = 1e-4;            // Armijo (sufficient decrease)
  double c2 = 0.9;             // curvature (strong Wolfe)
  int max_line_evals = 25;     // per line search
  double init_step = 1.0;      // first trial step, the "learning rate"
  double grad_tol = 0.0;       // treat ||g||_inf <= tol as converged
  double curvature_min = 1e-10;  // pairs with s.y below this are discarded
  double fallback_step = 1e-4;   // gradient step when the search fails
};

struct LbfgsState {
  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> pairs;
  bool converged = false;
  int iterations = 0;
  int fallbacks = 0;
};

struct LbfgsStepInfo {
  double f0 = 0.0;        // loss at entry (re-evaluated each step)
  double f1 = 0.0;        // loss at the accepted point
  double grad_norm = 0.0; // ||g||_2 at entry
  int evals = 0;          // loss_fn calls made by this step
  bool used_fallback = false;
  bool converged = false;
  bool accepted_wolfe = false;
};

/// One outer iteration: two-loop direction, strong-Wolfe line search from
/// init_step, history update under the curvature condition.
LbfgsStepInfo lbfgs_step(std::vector<double>& x, const LossFn& f, LbfgsState& state,
                         const LbfgsOptions& opt);

/// Convenience driver: iterates until ||g||_2 < gtol, f < ftol or max_iters.
struct MinimizeResult {
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int fallbacks = 0;
};
MinimizeResult lbfgs_minimize(std::vector<double>& x, const LossFn& f, const LbfgsOptions& opt,
                              int max_iters, double gtol = 0.0, double ftol = -1.0);

}  // namespace stanpinn
