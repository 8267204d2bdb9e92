#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ifdm/dual.hpp"
#include "ifdm/scenarios.hpp"
#include "helpers.hpp"

using namespace ifdm;
using namespace ifdm::test;

namespace {

DualProblem constant_problem(const SpaceTimeLattice& lat,
                             const AuxWeights& aw = AuxWeights{}) {
  const PrimalState ubar = scenario_constant(lat.grid);
  return DualProblem(lat, Backend::spectral, aw,
                     base_constant_in_time(ubar, lat.nt), ubar.v, ubar.alpha);
}

}  // namespace

TEST_CASE("packed state round trip is exact") {
  PeriodicGrid g(8);
  PrimalState s(g);
  s.v = random_field(g, 3, 1);
  s.alpha = random_field(g, 9, 2);
  s.p = random_field(g, 1, 3);
  PrimalState back = unpack_state(g, pack_state(s));
  CHECK(back == s);
}

TEST_CASE("flat layout round trip is exact") {
  SpaceTimeLattice lat(PeriodicGrid(4), 3, 0.3);
  DualState d = random_dual_state(lat, 9, 0.7);
  DualState back = from_flat(lat, to_flat(d));
  for (int l = 0; l <= lat.nt; ++l) {
    CHECK(back.lambda[l] == d.lambda[l]);
    CHECK(back.A[l] == d.A[l]);
    CHECK(back.mu[l] == d.mu[l]);
  }
}

TEST_CASE("packed dual gradient collocation") {
  PeriodicGrid g(8);
  SpaceTimeLattice lat(g, 8, 1.0);  // dt = 0.125, exactly representable
  SECTION("zero dual state gives zero collocation values") {
    DualState d(lat);
    auto calD = compute_calD(d, Backend::spectral);
    for (const auto& interval : calD)
      for (const PackedD& p : interval)
        for (Real x : p) CHECK(x == 0.0);
  }
  SECTION("linear-in-time lambda differences exactly") {
    DualState d(lat);
    const Real c[3] = {1.0, -0.5, 0.25};
    for (int l = 0; l <= lat.nt; ++l) {
      const Real t = l * lat.dt();
      for (int i = 0; i < 3; ++i) {
        Real* p = d.lambda[l].comp(i);
        for (std::size_t q = 0; q < g.points(); ++q) p[q] = c[i] * t;
      }
    }
    auto calD = compute_calD(d, Backend::spectral);
    for (const auto& interval : calD)
      for (const PackedD& pt : interval) {
        for (int i = 0; i < 3; ++i) CHECK(pt[dslot_lt(i)] == c[i]);
        for (int s = 3; s < kND; ++s) CHECK(pt[s] == 0.0);
      }
  }
  SECTION("static mu produces its spectral gradient") {
    DualState d(lat);
    for (int l = 0; l <= lat.nt; ++l)
      d.mu[l] = scalar_from(g, [](Real x1, Real, Real) {
        return std::sin(kTwoPi * x1);
      });
    auto calD = compute_calD(d, Backend::spectral);
    for (int k = 0; k < lat.nt; ++k)
      for (int i3 = 0; i3 < g.n; ++i3)
        for (int i2 = 0; i2 < g.n; ++i2)
          for (int i1 = 0; i1 < g.n; ++i1) {
            const PackedD& pt = calD[k][g.idx(i1, i2, i3)];
            CHECK(std::abs(pt[dslot_gmu(0)] -
                           kTwoPi * std::cos(kTwoPi * i1 * g.h())) <= 1e-12);
            CHECK(std::abs(pt[dslot_gmu(1)]) <= 1e-12);
            CHECK(pt[dslot_lt(0)] == 0.0);
          }
  }
}

TEST_CASE("zero dual state evaluates to zero") {
  SpaceTimeLattice lat(PeriodicGrid(8), 4, 0.5);
  DualProblem prob = constant_problem(lat);
  const DualEval ev = prob.evaluate(DualState(lat), true);
  REQUIRE(ev.ok);
  CHECK(ev.S == 0.0);
  CHECK(ev.S_closed == 0.0);
}

TEST_CASE("zero dual state is critical for an exact constant base") {
  SpaceTimeLattice lat(PeriodicGrid(8), 4, 0.5);
  DualProblem prob = constant_problem(lat);
  const DualEval ev = prob.evaluate(DualState(lat), true);
  REQUIRE(ev.ok);
  CHECK(prob.normalized_sup(ev.grad) <= 1e-13);
}

TEST_CASE("zero dual state is near-critical for the Alfven base") {
  const PeriodicGrid g(8);
  SpaceTimeLattice lat(g, 4, 0.25);
  const PrimalState ubar = scenario_beltrami_alfven(g);
  DualProblem prob(lat, Backend::spectral, AuxWeights{},
                   base_constant_in_time(ubar, lat.nt), ubar.v, ubar.alpha);
  const DualEval ev = prob.evaluate(DualState(lat), true);
  REQUIRE(ev.ok);
  CHECK(prob.normalized_sup(ev.grad) <= 1e-8);
}

TEST_CASE("the two dual functional routes agree") {
  SpaceTimeLattice lat(PeriodicGrid(4), 4, 0.5);
  DualProblem prob = constant_problem(lat);
  const DualState d = random_dual_state(lat, 4, 0.05);
  const DualEval ev = prob.evaluate(d, false);
  REQUIRE(ev.ok);
  CHECK(ev.max_form_gap <= 1e-12);
  CHECK(std::abs(ev.S - ev.S_closed) <= 1e-12 * (1.0 + std::abs(ev.S)));
}

TEST_CASE("gradient matches the weak residual assembled from primal operators") {
  const PeriodicGrid g(4);
  SpaceTimeLattice lat(g, 4, 0.5);
  const PrimalState ubar = scenario_random_smooth(g, 17);
  DualProblem prob(lat, Backend::spectral, AuxWeights{},
                   base_constant_in_time(ubar, lat.nt), ubar.v, ubar.alpha);
  const DualState d = random_dual_state(lat, 5, 0.05);
  const DualEval ev = prob.evaluate(d, true);
  REQUIRE(ev.ok);
  const std::vector<PrimalState> series = prob.extract_primal(d);
  const std::vector<Real> weak =
      hat_weak_residual(lat, series, ubar.v, ubar.alpha, Backend::spectral);
  REQUIRE(weak.size() == ev.grad.size());
  Real worst = 0.0, scale_ref = 0.0;
  for (std::size_t i = 0; i < weak.size(); ++i) {
    worst = std::max(worst, std::abs(weak[i] - ev.grad[i]));
    scale_ref = std::max(scale_ref, std::abs(ev.grad[i]));
  }
  CHECK(worst <= 1e-13 * std::max(Real(1.0), scale_ref / lat.weight()));
}

TEST_CASE("gradient components match central finite differences") {
  const PeriodicGrid g(4);
  SpaceTimeLattice lat(g, 4, 0.5);
  DualProblem prob = constant_problem(lat);
  const std::vector<Real> x0 = to_flat(random_dual_state(lat, 6, 0.01));
  const DualEval ev = prob.evaluate_flat(x0, true);
  REQUIRE(ev.ok);

  std::mt19937_64 rng(88);
  Real worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t i = rng() % x0.size();
    std::vector<Real> xp = x0, xm = x0;
    const Real eps = 1e-3;
    xp[i] += eps;
    xm[i] -= eps;
    const Real fd =
        (prob.evaluate_flat(xp, false).S - prob.evaluate_flat(xm, false).S) /
        (2.0 * eps);
    const Real an = ev.grad[i];
    const Real denom = std::max({std::abs(fd), std::abs(an), Real(1e-14)});
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("concavity of the dual functional") {
  SpaceTimeLattice lat(PeriodicGrid(4), 4, 0.5);
  DualProblem prob = constant_problem(lat);
  SECTION("midpoint inequality") {
    for (int trial = 0; trial < 20; ++trial) {
      const DualState a = random_dual_state(lat, 100 + trial, 0.05);
      const DualState b = random_dual_state(lat, 200 + trial, 0.05);
      DualState mid(lat);
      for (int l = 0; l <= lat.nt; ++l) {
        mid.lambda[l] = lincomb(0.5, a.lambda[l], 0.5, b.lambda[l]);
        mid.A[l] = lincomb(0.5, a.A[l], 0.5, b.A[l]);
        mid.mu[l] = lincomb(0.5, a.mu[l], 0.5, b.mu[l]);
      }
      const Real Sa = prob.evaluate(a, false).S;
      const Real Sb = prob.evaluate(b, false).S;
      const Real Sm = prob.evaluate(mid, false).S;
      CHECK(Sm >= 0.5 * (Sa + Sb) - 1e-12 * (1.0 + std::abs(Sm)));
    }
  }
  SECTION("directional second differences are non-positive") {
    for (int trial = 0; trial < 20; ++trial) {
      const DualState d = random_dual_state(lat, 300 + trial, 0.03);
      const DualState e = random_dual_state(lat, 400 + trial, 0.03);
      DualState dp(lat), dm(lat);
      for (int l = 0; l <= lat.nt; ++l) {
        dp.lambda[l] = lincomb(1.0, d.lambda[l], 1.0, e.lambda[l]);
        dp.A[l] = lincomb(1.0, d.A[l], 1.0, e.A[l]);
        dp.mu[l] = lincomb(1.0, d.mu[l], 1.0, e.mu[l]);
        dm.lambda[l] = lincomb(1.0, d.lambda[l], -1.0, e.lambda[l]);
        dm.A[l] = lincomb(1.0, d.A[l], -1.0, e.A[l]);
        dm.mu[l] = lincomb(1.0, d.mu[l], -1.0, e.mu[l]);
      }
      const Real second = prob.evaluate(dp, false).S -
                          2.0 * prob.evaluate(d, false).S +
                          prob.evaluate(dm, false).S;
      CHECK(second <= 1e-12);
    }
  }
}

TEST_CASE("maximize from the exact critical point converges immediately") {
  SpaceTimeLattice lat(PeriodicGrid(4), 4, 0.5);
  DualProblem prob = constant_problem(lat);
  DualSolveOptions opt;
  const auto res = prob.maximize(DualState(lat), opt);
  CHECK(res.report.status == LbfgsStatus::converged);
  CHECK(res.report.iterations == 0);
}

TEST_CASE("maximize recovers the exact constant solution from a random start") {
  SpaceTimeLattice lat(PeriodicGrid(4), 4, 0.5);
  DualProblem prob = constant_problem(lat);
  DualSolveOptions opt;
  opt.tol = 1e-11;
  opt.max_iter = 2000;
  const DualState d0 = random_dual_state(lat, 12, 1e-3);
  const auto res = prob.maximize(d0, opt);
  REQUIRE(res.report.status == LbfgsStatus::converged);

  // S stays non-decreasing across accepted iterates.
  for (std::size_t i = 1; i < res.report.S_history.size(); ++i)
    CHECK(res.report.S_history[i] >= res.report.S_history[i - 1] - 1e-15);

  // The maximum value is S(0) = 0.
  CHECK(res.report.S_history.back() <= 1e-12);

  // The mapped primal series returns to the base state.
  const PrimalState ubar = scenario_constant(lat.grid);
  const std::vector<PrimalState> series = prob.extract_primal(res.d_star);
  Real worst = 0.0;
  for (const PrimalState& s : series) {
    worst = std::max(worst, max_diff(s.v, ubar.v));
    worst = std::max(worst, max_diff(s.alpha, ubar.alpha));
    worst = std::max(worst, max_diff(s.p, ubar.p));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("extract_primal at the zero dual state returns the base series") {
  SpaceTimeLattice lat(PeriodicGrid(4), 3, 0.3);
  const PrimalState ubar = scenario_random_smooth(lat.grid, 19);
  DualProblem prob(lat, Backend::spectral, AuxWeights{},
                   base_constant_in_time(ubar, lat.nt), ubar.v, ubar.alpha);
  const std::vector<PrimalState> series = prob.extract_primal(DualState(lat));
  REQUIRE(series.size() == static_cast<std::size_t>(lat.nt));
  for (const PrimalState& s : series) {
    CHECK(s.v == ubar.v);
    CHECK(s.alpha == ubar.alpha);
    CHECK(s.p == ubar.p);
  }
}

TEST_CASE("mapping failure at the start is reported") {
  SpaceTimeLattice lat(PeriodicGrid(4), 3, 0.3);
  DualProblem prob = constant_problem(lat);
  const DualState d0 = random_dual_state(lat, 21, 5e3);  // far outside SPD region
  const auto res = prob.maximize(d0, DualSolveOptions{});
  CHECK(res.report.status == LbfgsStatus::initial_point_infeasible);
}

TEST_CASE("fd2 backend keeps the critical-point property for constant bases") {
  SpaceTimeLattice lat(PeriodicGrid(8), 4, 0.5);
  const PrimalState ubar = scenario_constant(lat.grid);
  DualProblem prob(lat, Backend::fd2, AuxWeights{},
                   base_constant_in_time(ubar, lat.nt), ubar.v, ubar.alpha);
  const DualEval ev = prob.evaluate(DualState(lat), true);
  REQUIRE(ev.ok);
  CHECK(prob.normalized_sup(ev.grad) <= 1e-13);

  // Gradient vs finite differences holds for the fd2 backend too.
  const std::vector<Real> x0 = to_flat(random_dual_state(lat, 23, 0.01));
  const DualEval ev2 = prob.evaluate_flat(x0, true);
  std::mt19937_64 rng(3);
  Real worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t i = rng() % x0.size();
    std::vector<Real> xp = x0, xm = x0;
    const Real eps = 1e-3;
    xp[i] += eps;
    xm[i] -= eps;
    const Real fd =
        (prob.evaluate_flat(xp, false).S - prob.evaluate_flat(xm, false).S) /
        (2.0 * eps);
    const Real denom = std::max({std::abs(fd), std::abs(ev2.grad[i]), Real(1e-14)});
    worst = std::max(worst, std::abs(fd - ev2.grad[i]) / denom);
  }
  CHECK(worst <= 1e-6);
}
