// Runtime invariant suites behind the `check` command: operator oracles,
// packed-vs-direct Lagrangian agreement, mapping contracts, gradient and
// concavity probes for the dual functional. Each check returns a named
// pass/fail with a one-line detail.
//
// The fault-injection hook feeds deliberately corrupted coupling tables
// through the same code paths, proving the suite actually detects table
// damage rather than vacuously passing.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "ifdm/dual.hpp"
#include "ifdm/scenarios.hpp"

namespace ifdm {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

enum class FaultInjection { none, corrupt_b_table };

namespace checks {

inline PackedU random_u(std::mt19937_64& rng, Real s = 1.0) {
  PackedU u;
  for (Real& x : u) x = s * uniform_pm1(rng);
  return u;
}

inline PackedD random_d(std::mt19937_64& rng, Real s = 1.0) {
  PackedD d;
  for (Real& x : d) x = s * uniform_pm1(rng);
  return d;
}

inline std::string fmt(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline OperatorTables corrupted_tables() {
  OperatorTables t = operator_tables();
  t.B[t.B.size() / 3].value += 1e-3;  // one damaged quadratic coupling
  return t;
}

// --- operators suite -------------------------------------------------------

inline std::vector<CheckResult> suite_operators() {
  std::vector<CheckResult> out;
  const PeriodicGrid g(16);

  {
    Field f = make_scalar(g);
    for (int i3 = 0; i3 < g.n; ++i3)
      for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1)
          f.at(0, i1, i2, i3) = std::sin(kTwoPi * i1 * g.h());
    Field gr = grad_scalar(f);
    Real worst = 0.0;
    for (int i3 = 0; i3 < g.n; ++i3)
      for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1) {
          worst = std::max(worst, std::abs(gr.at(0, i1, i2, i3) -
                                           kTwoPi * std::cos(kTwoPi * i1 * g.h())));
          worst = std::max(worst, std::abs(gr.at(1, i1, i2, i3)));
          worst = std::max(worst, std::abs(gr.at(2, i1, i2, i3)));
        }
    out.push_back({"spectral gradient single-mode oracle", worst <= 1e-12,
                   "max err " + fmt(worst)});
  }
  {
    Field T = make_tensor(g);
    std::mt19937_64 rng(42);
    for (Real& v : T.data) v = uniform_pm1(rng);
    T = dealias_truncate(T);  // keep it band-limited
    const Real worst = max_abs(div_tensor_rowwise(curl_rowwise(T)));
    out.push_back({"div of row-wise curl vanishes", worst <= 1e-12,
                   "max |div curl| " + fmt(worst)});
  }
  {
    Field f = make_scalar(g);
    std::mt19937_64 rng(43);
    for (Real& v : f.data) v = uniform_pm1(rng);
    f = dealias_truncate(f);
    Field gr = grad_scalar(f);
    Field rows = make_tensor(g);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (std::size_t q = 0; q < g.points(); ++q)
          rows.comp(tensor_comp(i, j))[q] = gr.comp(j)[q];
    const Real worst = max_abs(curl_rowwise(rows));
    out.push_back({"row-wise curl of gradient rows vanishes", worst <= 1e-12,
                   "max " + fmt(worst)});
  }
  {
    std::mt19937_64 rng(44);
    Field f = make_scalar(g), h = make_scalar(g);
    for (Real& v : f.data) v = uniform_pm1(rng);
    for (Real& v : h.data) v = uniform_pm1(rng);
    const Real a = 1.37, b = -0.61;
    Field lhs = grad_scalar(lincomb(a, f, b, h));
    Field rhs = lincomb(a, grad_scalar(f), b, grad_scalar(h));
    Real worst = 0.0;
    for (std::size_t q = 0; q < lhs.data.size(); ++q)
      worst = std::max(worst, std::abs(lhs.data[q] - rhs.data[q]));
    const Real scale_ref = std::max(max_abs(lhs), Real(1.0));
    out.push_back({"operator linearity", worst <= 1e-13 * scale_ref,
                   "max gap " + fmt(worst)});
  }
  {
    Field w = random_curl_field(g, 7, 0.5);
    Field f = make_scalar(g);
    std::mt19937_64 rng(45);
    for (Real& v : f.data) v = uniform_pm1(rng);
    f = dealias_truncate(f);
    Field v = lincomb(1.0, w, 1.0, grad_scalar(f));
    Field pv = leray_project(v);
    Real worst = 0.0;
    for (std::size_t q = 0; q < pv.data.size(); ++q)
      worst = std::max(worst, std::abs(pv.data[q] - w.data[q]));
    out.push_back({"Leray projection recovers solenoidal part", worst <= 1e-12,
                   "max err " + fmt(worst)});
    const Real dv = max_abs(div_vector(pv));
    out.push_back({"Leray output divergence-free", dv <= 1e-12, "max div " + fmt(dv)});
  }
  return out;
}

// --- algebra suite ---------------------------------------------------------

inline std::vector<CheckResult> suite_algebra(FaultInjection fault) {
  std::vector<CheckResult> out;
  const OperatorTables tab =
      fault == FaultInjection::corrupt_b_table ? corrupted_tables() : operator_tables();
  const AuxWeights aw;
  std::mt19937_64 rng(1234);

  {
    std::size_t nonzeros = tab.M.size();
    out.push_back({"linear table has exactly 18 nonzeros", nonzeros == 18,
                   std::to_string(nonzeros) + " entries"});
  }
  {
    bool sym = true;
    for (const BEntry& e : tab.B) {
      Real other = 0.0;
      for (const BEntry& f : tab.B)
        if (f.d == e.d && f.j == e.k && f.k == e.j) other = f.value;
      if (other != e.value) sym = false;
    }
    out.push_back({"quadratic table symmetric in last two slots", sym, ""});
  }
  {
    Real worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
      const PackedU u = random_u(rng), ubar = random_u(rng);
      const PackedD d = random_d(rng);
      const Real lp = lagrangian_packed(u, d, ubar, aw, tab);
      const Real ld = lagrangian_direct(u, d, ubar, aw);
      worst = std::max(worst, std::abs(lp - ld) / (1.0 + std::abs(ld)));
    }
    out.push_back({"packed-vs-direct Lagrangian", worst <= 1e-13,
                   "max rel gap " + fmt(worst)});
  }
  {
    // Quadratic form must ignore antisymmetric grad-lambda and
    // symmetric-(j,r) grad-A perturbations.
    Real worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const PackedU u = random_u(rng);
      PackedD d = random_d(rng);
      const Real q0 = quadratic_part(u, d, tab);
      PackedD d2 = d;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < i; ++j) {
          const Real eps = uniform_pm1(rng);
          d2[dslot_G(i, j)] += eps;
          d2[dslot_G(j, i)] -= eps;
        }
      worst = std::max(worst,
                       std::abs(quadratic_part(u, d2, tab) - q0) / (1.0 + std::abs(q0)));
      PackedD d3 = d;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int r = 0; r <= j; ++r) {
            const Real eps = uniform_pm1(rng);
            d3[dslot_H(i, j, r)] += eps;
            d3[dslot_H(i, r, j)] += eps;
          }
      worst = std::max(worst,
                       std::abs(quadratic_part(u, d3, tab) - q0) / (1.0 + std::abs(q0)));
    }
    out.push_back({"reduced dependence of the quadratic form", worst <= 1e-14,
                   "max rel change " + fmt(worst)});
  }
  {
    // Affine in D: second differences vanish identically.
    Real worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const PackedU u = random_u(rng), ubar = random_u(rng);
      const PackedD d = random_d(rng), e = random_d(rng);
      PackedD dp = d, dm = d;
      for (int s = 0; s < kND; ++s) {
        dp[s] += e[s];
        dm[s] -= e[s];
      }
      const Real second = lagrangian_packed(u, dp, ubar, aw, tab) -
                          2.0 * lagrangian_packed(u, d, ubar, aw, tab) +
                          lagrangian_packed(u, dm, ubar, aw, tab);
      worst = std::max(worst, std::abs(second));
    }
    out.push_back({"Lagrangian affine in dual gradients", worst <= 1e-12,
                   "max 2nd diff " + fmt(worst)});
  }
  {
    // Envelope derivative vs centered differences.
    Real worst = 0.0;
    const PackedU u = random_u(rng);
    const PackedU ubar{};
    const PackedD g = envelope_dL_dD(u, tab);
    for (int s = 0; s < kND; ++s) {
      PackedD dp{}, dm{};
      const Real eps = 1e-4;
      dp[s] = eps;
      dm[s] = -eps;
      const Real fd = (lagrangian_packed(u, dp, ubar, aw, tab) -
                       lagrangian_packed(u, dm, ubar, aw, tab)) /
                      (2.0 * eps);
      worst = std::max(worst, std::abs(fd - g[s]) / (1.0 + std::abs(g[s])));
    }
    out.push_back({"envelope derivative matches finite differences", worst <= 1e-7,
                   "max rel err " + fmt(worst)});
  }
  return out;
}

// --- mapping suite ---------------------------------------------------------

inline std::vector<CheckResult> suite_mapping() {
  std::vector<CheckResult> out;
  const OperatorTables& tab = operator_tables();
  const AuxWeights aw;
  std::mt19937_64 rng(777);

  {
    bool exact = true;
    for (int trial = 0; trial < 100; ++trial) {
      const PackedU ubar = random_u(rng);
      const DtpResult r = dtp_solve(PackedD{}, ubar, aw, tab);
      for (int i = 0; i < kNU; ++i)
        if (r.u_hat[i] != ubar[i]) exact = false;
    }
    out.push_back({"zero dual gradient maps to the base state exactly", exact, ""});
  }
  {
    Real worst = 0.0;
    bool all_ok = true;
    for (int trial = 0; trial < 10000; ++trial) {
      const PackedU ubar = random_u(rng);
      const PackedD d = random_d(rng, 5.0);
      const DtpResult r = dtp_solve(d, ubar, aw, tab);
      if (!r.ok) {
        all_ok = false;
        continue;
      }
      Real dn = 0.0;
      for (Real x : d) dn = std::max(dn, std::abs(x));
      worst = std::max(worst, r.residual_norm / dn);
    }
    out.push_back({"substitute-back residual within 1e-11 of dual magnitude",
                   all_ok && worst <= 1e-11, "max scaled residual " + fmt(worst)});
  }
  {
    // The mapped point minimizes the convex per-point Lagrangian.
    bool minimal = true;
    for (int trial = 0; trial < 50; ++trial) {
      const PackedU ubar = random_u(rng);
      const PackedD d = random_d(rng, 5.0);
      const DtpResult r = dtp_solve(d, ubar, aw, tab);
      const Real lhat = lagrangian_packed(r.u_hat, d, ubar, aw, tab);
      for (int probe = 0; probe < 20; ++probe) {
        PackedU u = r.u_hat;
        for (Real& x : u) x += 0.1 * uniform_pm1(rng);
        if (lagrangian_packed(u, d, ubar, aw, tab) < lhat - 1e-12) minimal = false;
      }
    }
    out.push_back({"mapped point minimizes the per-point Lagrangian", minimal, ""});
  }
  {
    PackedD d{};
    d[dslot_G(0, 1)] = 10.0 * aw.a_v;  // indefinite 2x2 velocity block
    const DtpResult r = dtp_solve(d, PackedU{}, aw, tab);
    out.push_back({"adversarial dual point signals mapping failure", !r.ok,
                   "min pivot " + fmt(r.min_pivot)});
  }
  return out;
}

// --- dual suite ------------------------------------------------------------

inline std::vector<CheckResult> suite_dual(FaultInjection fault) {
  std::vector<CheckResult> out;
  const OperatorTables tab =
      fault == FaultInjection::corrupt_b_table ? corrupted_tables() : operator_tables();
  const AuxWeights aw;
  const PeriodicGrid g(4);
  const SpaceTimeLattice lat(g, 4, 0.5);

  const PrimalState ubar = scenario_constant(g);
  DualProblem prob(lat, Backend::spectral, aw,
                   base_constant_in_time(ubar, lat.nt), ubar.v, ubar.alpha,
                   &tab);

  {
    const DualEval ev = prob.evaluate(DualState(lat), true);
    const Real gn = prob.normalized_sup(ev.grad);
    out.push_back({"zero dual state is critical for an exact constant base",
                   ev.ok && std::abs(ev.S) <= 1e-14 && gn <= 1e-13,
                   "S " + fmt(ev.S) + ", grad " + fmt(gn)});
  }

  const DualState d0 = random_dual_state(lat, 99, 1e-2);
  {
    const DualEval ev = prob.evaluate(d0, true);
    out.push_back({"two dual functional routes agree", ev.ok && ev.max_form_gap <= 1e-12,
                   "max pointwise gap " + fmt(ev.max_form_gap)});

    // Independent weak-residual route built from the primal operators.
    const std::vector<PrimalState> series = prob.extract_primal(d0);
    const std::vector<Real> weak =
        hat_weak_residual(lat, series, ubar.v, ubar.alpha, Backend::spectral);
    Real worst = 0.0, scale_ref = 0.0;
    for (std::size_t i = 0; i < weak.size(); ++i) {
      worst = std::max(worst, std::abs(weak[i] - ev.grad[i]));
      scale_ref = std::max(scale_ref, std::abs(ev.grad[i]));
    }
    out.push_back({"gradient equals weak-form primal residual",
                   worst <= 1e-13 * std::max(scale_ref / lat.weight(), Real(1.0)),
                   "max gap " + fmt(worst) + " vs scale " + fmt(scale_ref)});
  }
  {
    // Gradient vs centered finite differences along a handful of directions.
    const std::vector<Real> x0 = to_flat(d0);
    const DualEval ev = prob.evaluate_flat(x0, true);
    std::mt19937_64 rng(5150);
    Real worst = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<Real> dir(x0.size());
      for (Real& v : dir) v = uniform_pm1(rng);
      const Real eps = 1e-3;
      std::vector<Real> xp = x0, xm = x0;
      for (std::size_t i = 0; i < x0.size(); ++i) {
        xp[i] += eps * dir[i];
        xm[i] -= eps * dir[i];
      }
      const Real fd = (prob.evaluate_flat(xp, false).S -
                       prob.evaluate_flat(xm, false).S) /
                      (2.0 * eps);
      Real an = 0.0;
      for (std::size_t i = 0; i < x0.size(); ++i) an += ev.grad[i] * dir[i];
      worst = std::max(worst, std::abs(fd - an) / (1.0 + std::abs(an)));
    }
    out.push_back({"directional derivatives match finite differences", worst <= 1e-6,
                   "max rel err " + fmt(worst)});
  }
  {
    // Midpoint concavity on random feasible pairs.
    std::mt19937_64 rng(31);
    bool concave = true;
    Real margin = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const DualState a = random_dual_state(lat, 1000 + trial, 2e-2);
      const DualState b = random_dual_state(lat, 2000 + trial, 2e-2);
      DualState mid(lat);
      for (int l = 0; l <= lat.nt; ++l) {
        mid.lambda[l] = lincomb(0.5, a.lambda[l], 0.5, b.lambda[l]);
        mid.A[l] = lincomb(0.5, a.A[l], 0.5, b.A[l]);
        mid.mu[l] = lincomb(0.5, a.mu[l], 0.5, b.mu[l]);
      }
      const Real Sa = prob.evaluate(a, false).S;
      const Real Sb = prob.evaluate(b, false).S;
      const Real Sm = prob.evaluate(mid, false).S;
      const Real slack = Sm - 0.5 * (Sa + Sb);
      margin = std::min(margin, slack);
      if (slack < -1e-12 * (1.0 + std::abs(Sm))) concave = false;
    }
    (void)rng;
    out.push_back({"midpoint concavity of the dual functional", concave,
                   "worst slack " + fmt(margin)});
  }
  return out;
}

}  // namespace checks

inline std::vector<CheckResult> run_check_suite(const std::string& suite,
                                                FaultInjection fault =
                                                    FaultInjection::none) {
  std::vector<CheckResult> out;
  auto append = [&out](std::vector<CheckResult> v) {
    for (auto& r : v) out.push_back(std::move(r));
  };
  if (suite == "operators" || suite == "all") append(checks::suite_operators());
  if (suite == "algebra" || suite == "all") append(checks::suite_algebra(fault));
  if (suite == "mapping" || suite == "all") append(checks::suite_mapping());
  if (suite == "dual" || suite == "all") append(checks::suite_dual(fault));
  if (out.empty())
    throw ArgumentError("run_check_suite: unknown suite '" + suite +
                        "' (operators, algebra, mapping, dual, all)");
  return out;
}

}  // namespace ifdm
