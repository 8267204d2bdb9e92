// Pseudo-spectral method-of-lines forward solver for ideal (and lightly
// regularized) FDM/MHD on the periodic cube.
//
// Pressure never appears in the march: incompressibility is enforced by
// Leray projection of the momentum rate, and p is reconstructed on demand
// from -Lap(p) = div div(v (x) v - alpha^T alpha) in the zero-mean gauge.
// Quadratic products are 2/3-rule dealiased by default.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ifdm/primal.hpp"

namespace ifdm {

struct IntegratorConfig {
  Real dt = 1e-3;
  int steps = 1;
  Real nu = 0.0;   // viscosity on v
  Real eta = 0.0;  // diffusion on alpha
  bool dealias = true;
  Real cfl_bound = 0.5;

  void validate() const {
    if (!(dt > 0.0)) throw ArgumentError("IntegratorConfig: dt must be positive");
    if (steps < 1) throw ArgumentError("IntegratorConfig: steps must be >= 1");
    if (nu < 0.0 || eta < 0.0)
      throw ArgumentError("IntegratorConfig: nu, eta must be >= 0");
  }
};

struct StateRates {
  Field dv;
  Field dalpha;
};

// Semidiscrete rates:
//   dv/dt     = Leray[-div(v(x)v - alpha^T alpha)] + nu Lap v
//   dalpha/dt = -curl_rowwise(alpha x v)           + eta Lap alpha
inline StateRates semidiscrete_rhs(const Field& v, const Field& alpha,
                                   const IntegratorConfig& cfg) {
  require_finite(v, "semidiscrete_rhs");
  require_finite(alpha, "semidiscrete_rhs");

  // Momentum flux without the pressure slot; the projection absorbs it.
  const std::size_t np = v.points();
  Field flux = make_tensor(v.grid);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Real* out = flux.comp(tensor_comp(i, j));
      const Real* vi = v.comp(i);
      const Real* vj = v.comp(j);
      for (std::size_t q = 0; q < np; ++q) out[q] = vi[q] * vj[q];
      for (int k = 0; k < 3; ++k) {
        const Real* aki = alpha.comp(tensor_comp(k, i));
        const Real* akj = alpha.comp(tensor_comp(k, j));
        for (std::size_t q = 0; q < np; ++q) out[q] -= aki[q] * akj[q];
      }
    }

  StateRates rates;
  Field divflux = div_tensor_rowwise(flux, Backend::spectral, cfg.dealias);
  scale(divflux, -1.0);
  rates.dv = leray_project(divflux);
  if (cfg.nu > 0.0) axpy(cfg.nu, laplacian(v, Backend::spectral), rates.dv);

  rates.dalpha = transport_rhs(alpha, v, Backend::spectral, cfg.dealias);
  if (cfg.eta > 0.0) axpy(cfg.eta, laplacian(alpha, Backend::spectral), rates.dalpha);
  return rates;
}

inline StateRates semidiscrete_rhs(const PrimalState& s, const IntegratorConfig& cfg) {
  return semidiscrete_rhs(s.v, s.alpha, cfg);
}

// One classical RK4 step; the post state is re-projected to div-free v.
// Throws StepSizeError when dt*(max|v| + max|alpha|)*n exceeds the CFL bound.
inline PrimalState step_rk4(const PrimalState& s, const IntegratorConfig& cfg) {
  cfg.validate();
  const Real speed = max_abs(s.v) + max_abs(s.alpha);
  if (cfg.dt * speed * s.grid().n > cfg.cfl_bound)
    throw StepSizeError("step_rk4: CFL bound violated, dt*(max|v|+max|alpha|)*n = " +
                        std::to_string(cfg.dt * speed * s.grid().n));

  const Real dt = cfg.dt;
  StateRates k1 = semidiscrete_rhs(s.v, s.alpha, cfg);

  Field v2 = lincomb(1.0, s.v, 0.5 * dt, k1.dv);
  Field a2 = lincomb(1.0, s.alpha, 0.5 * dt, k1.dalpha);
  StateRates k2 = semidiscrete_rhs(v2, a2, cfg);

  Field v3 = lincomb(1.0, s.v, 0.5 * dt, k2.dv);
  Field a3 = lincomb(1.0, s.alpha, 0.5 * dt, k2.dalpha);
  StateRates k3 = semidiscrete_rhs(v3, a3, cfg);

  Field v4 = lincomb(1.0, s.v, dt, k3.dv);
  Field a4 = lincomb(1.0, s.alpha, dt, k3.dalpha);
  StateRates k4 = semidiscrete_rhs(v4, a4, cfg);

  PrimalState out(s.grid());
  const Real w = dt / 6.0;
  out.v = s.v;
  axpy(w, k1.dv, out.v);
  axpy(2.0 * w, k2.dv, out.v);
  axpy(2.0 * w, k3.dv, out.v);
  axpy(w, k4.dv, out.v);
  out.v = leray_project(out.v);

  out.alpha = s.alpha;
  axpy(w, k1.dalpha, out.alpha);
  axpy(2.0 * w, k2.dalpha, out.alpha);
  axpy(2.0 * w, k3.dalpha, out.alpha);
  axpy(w, k4.dalpha, out.alpha);

  out.p = s.p;
  return out;
}

// Pressure in the zero-mean gauge: -Lap p = div div(v(x)v - alpha^T alpha).
inline Field reconstruct_pressure(const Field& v, const Field& alpha) {
  PrimalState tmp(v.grid);
  tmp.v = v;
  tmp.alpha = alpha;
  Field sigma0 = momentum_flux(tmp);  // p = 0 here, so this is the quadratic part
  Field g = div_vector(div_tensor_rowwise(sigma0, Backend::spectral),
                       Backend::spectral);
  return solve_neg_laplacian(g);
}

struct Trajectory {
  std::vector<Real> times;
  std::vector<PrimalState> states;  // pressure reconstructed per sample
  std::vector<ConservationReport> reports;
  bool aborted = false;        // NaN detected; states holds up to last good
  std::string abort_message;
};

// March `cfg.steps` RK4 steps from state0, sampling every `sample_every`
// steps (state0 is always sample 0). Diagnostics are attached per sample.
inline Trajectory integrate(const PrimalState& state0, const IntegratorConfig& cfg,
                            int sample_every = 1, bool with_reports = true) {
  cfg.validate();
  if (sample_every < 1) throw ArgumentError("integrate: sample_every must be >= 1");
  Trajectory traj;
  PrimalState cur = state0;
  cur.p = reconstruct_pressure(cur.v, cur.alpha);

  auto sample = [&](Real t) {
    traj.times.push_back(t);
    traj.states.push_back(cur);
    if (with_reports) traj.reports.push_back(conservation_report(cur, t));
  };
  sample(0.0);

  for (int step = 1; step <= cfg.steps; ++step) {
    PrimalState next;
    try {
      next = step_rk4(cur, cfg);
    } catch (const InvalidFieldError&) {
      // Overflow inside a stage evaluation; same abort path as a NaN state.
      traj.aborted = true;
      traj.abort_message = "non-finite intermediate at step " + std::to_string(step);
      break;
    }
    if (!is_finite(next.v) || !is_finite(next.alpha)) {
      traj.aborted = true;
      traj.abort_message = "non-finite state at step " + std::to_string(step);
      break;
    }
    cur = next;
    if (step % sample_every == 0 || step == cfg.steps) {
      cur.p = reconstruct_pressure(cur.v, cur.alpha);
      sample(step * cfg.dt);
    }
  }
  return traj;
}

}  // namespace ifdm
