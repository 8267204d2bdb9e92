// Limited-memory BFGS with Armijo backtracking, written against an
// evaluator that may reject a point outright (the caller treats rejection
// as an infeasible step and the line search shrinks toward the current
// iterate, which is always feasible).
//
// The driver minimizes; callers maximizing a functional hand in the
// negated value and gradient.
#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "ifdm/core.hpp"

namespace ifdm {

struct LbfgsOptions {
  int history = 10;
  int max_iter = 500;
  Real c1 = 1e-4;          // Armijo slope fraction
  Real backtrack = 0.5;    // step shrink factor
  int max_backtracks = 50;
};

enum class LbfgsStatus {
  converged,
  max_iterations,
  line_search_stagnated,
  initial_point_infeasible,
};

inline const char* to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::converged: return "converged";
    case LbfgsStatus::max_iterations: return "max-iterations";
    case LbfgsStatus::line_search_stagnated: return "line-search-stagnated";
    case LbfgsStatus::initial_point_infeasible: return "initial-point-infeasible";
  }
  return "?";
}

struct LbfgsOutcome {
  LbfgsStatus status = LbfgsStatus::max_iterations;
  int iterations = 0;
  Real f = 0.0;
  std::vector<Real> steps;  // accepted step length per iteration
};

namespace detail {
inline Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

// evaluate(x, f, g) -> feasible? (always fills f and g when feasible)
// converged(f, g)   -> stop test, checked at every accepted iterate
// on_iterate(iter, f, g, step) -> per-iteration hook (reporting)
inline LbfgsOutcome lbfgs_minimize(
    std::vector<Real>& x,
    const std::function<bool(const std::vector<Real>&, Real&, std::vector<Real>&)>&
        evaluate,
    const std::function<bool(Real, const std::vector<Real>&)>& converged,
    const LbfgsOptions& opt,
    const std::function<void(int, Real, const std::vector<Real>&, Real)>& on_iterate =
        nullptr) {
  LbfgsOutcome out;
  const std::size_t n = x.size();
  Real f;
  std::vector<Real> g(n);
  if (!evaluate(x, f, g)) {
    out.status = LbfgsStatus::initial_point_infeasible;
    return out;
  }
  if (on_iterate) on_iterate(0, f, g, 0.0);
  if (converged(f, g)) {
    out.status = LbfgsStatus::converged;
    out.f = f;
    return out;
  }

  std::deque<std::vector<Real>> s_hist, y_hist;
  std::deque<Real> rho_hist;

  std::vector<Real> d(n), x_new(n), g_new(n);
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    // Two-loop recursion for d = -H g.
    d = g;
    std::vector<Real> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * detail::dot(s_hist[i], d);
      for (std::size_t q = 0; q < n; ++q) d[q] -= alpha[i] * y_hist[i][q];
    }
    if (!s_hist.empty()) {
      const Real gamma = detail::dot(s_hist.back(), y_hist.back()) /
                         detail::dot(y_hist.back(), y_hist.back());
      for (Real& v : d) v *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const Real beta = rho_hist[i] * detail::dot(y_hist[i], d);
      for (std::size_t q = 0; q < n; ++q)
        d[q] += (alpha[i] - beta) * s_hist[i][q];
    }
    for (Real& v : d) v = -v;

    Real slope = detail::dot(g, d);
    if (!(slope < 0.0)) {
      // Not a descent direction; drop the memory and fall back to steepest.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t q = 0; q < n; ++q) d[q] = -g[q];
      slope = detail::dot(g, d);
      if (!(slope < 0.0)) {
        out.status = LbfgsStatus::converged;  // gradient numerically zero
        out.f = f;
        out.iterations = iter - 1;
        return out;
      }
    }

    // Armijo backtracking; infeasible trial points just shrink the step.
    Real t = 1.0;
    Real f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      for (std::size_t q = 0; q < n; ++q) x_new[q] = x[q] + t * d[q];
      if (evaluate(x_new, f_new, g_new) && f_new <= f + opt.c1 * t * slope) {
        accepted = true;
        break;
      }
      t *= opt.backtrack;
    }
    if (!accepted) {
      out.status = LbfgsStatus::line_search_stagnated;
      out.f = f;
      out.iterations = iter - 1;
      return out;
    }

    std::vector<Real> s_vec(n), y_vec(n);
    for (std::size_t q = 0; q < n; ++q) {
      s_vec[q] = x_new[q] - x[q];
      y_vec[q] = g_new[q] - g[q];
    }
    const Real sy = detail::dot(s_vec, y_vec);
    if (sy > 1e-12 * std::sqrt(detail::dot(s_vec, s_vec) * detail::dot(y_vec, y_vec))) {
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(y_vec));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    out.steps.push_back(t);
    out.iterations = iter;
    if (on_iterate) on_iterate(iter, f, g, t);
    if (converged(f, g)) {
      out.status = LbfgsStatus::converged;
      out.f = f;
      return out;
    }
  }
  out.status = LbfgsStatus::max_iterations;
  out.f = f;
  return out;
}

}  // namespace ifdm
