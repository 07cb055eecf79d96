#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dstring/bathsim.hpp"
#include "dstring/quadrature.hpp"
#include "dstring/transitions.hpp"

using namespace dstring;

namespace {

const StringParams kUnit{1.0, 1.0, 1.0, 0.1};

CouplingSpec ohmic(double cutoff) { return CouplingSpec::paper_ohmic(0.1, 1.0, cutoff); }

// The reference run is shared by several tests; it costs a few seconds.
const OracleRun& reference_run() {
  static const OracleRun run = [] {
    const auto bath = discretize_bath(ohmic(50.0 * pi), 2000);
    return evolve_coefficients(kUnit, bath, 1, TimeGrid{0.02, 3601}, 0.002);
  }();
  return run;
}

TEST(Discretize, ZeroCouplingGivesZeroWeights) {
  const auto bath = discretize_bath(CouplingSpec::none(10.0), 50);
  ASSERT_EQ(bath.n_modes(), 50u);
  for (double g : bath.g) EXPECT_EQ(g, 0.0);
  EXPECT_NEAR(bath.omega.front(), 0.1, 1e-15);
  EXPECT_NEAR(bath.omega.back(), 9.9, 1e-14);
}

TEST(Discretize, Preconditions) {
  try {
    discretize_bath(CouplingSpec::paper_ohmic(0.1, 1.0), 100);
    FAIL() << "expected CutoffRequired";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CutoffRequired);
  }
  EXPECT_THROW(discretize_bath(ohmic(10.0), 1), Error);
}

TEST(Discretize, MomentsApproachContinuum) {
  const auto spec = CouplingSpec::power_law(0.02, 0.5, 12.0);
  for (double p : {1.0, 2.0, 3.0}) {
    const auto exact = integrate(
        [&](double w) { return 4.0 * pi * std::pow(w, 2.0 + p) * spec.spectral_weight(w); }, 0.0, 12.0);
    double previous = 1.0;
    for (std::size_t n : {50u, 100u, 200u, 400u}) {
      const double err = std::abs(discretize_bath(spec, n).moment(p) / exact.value - 1.0);
      if (n >= 100u) {
        EXPECT_LT(err, 0.01) << p << " " << n;
      }
      EXPECT_LT(err, 0.5 * previous) << p << " " << n;
      previous = err;
    }
  }
}

TEST(Discretize, OhmicFirstMomentIsExact) {
  // 4 pi w^2 |f|^2 = beta / (pi L w), so w times it is flat and the midpoint rule is exact.
  const auto bath = discretize_bath(ohmic(20.0), 4000);
  EXPECT_NEAR(bath.moment(1.0), 0.1 / pi * 20.0, 1e-12);
}

TEST(Discretize, ResonanceRefinedGrid) {
  GridPolicy policy{GridKind::ResonanceRefined, {pi, 2.0 * pi}, 0.5, 0.5};
  const auto bath = discretize_bath(ohmic(20.0), 400, policy);
  EXPECT_NEAR(static_cast<double>(bath.n_modes()), 400.0, 3.0);
  EXPECT_TRUE(std::is_sorted(bath.omega.begin(), bath.omega.end()));
  double total = 0.0;
  for (double h : bath.width) total += h;
  EXPECT_NEAR(total, 20.0, 1e-12);
  const auto near = std::min_element(bath.omega.begin(), bath.omega.end(),
                                     [](double a, double b) { return std::abs(a - pi) < std::abs(b - pi); });
  EXPECT_NEAR(bath.width[near - bath.omega.begin()], 1.0 / 100.0, 1e-12);
  EXPECT_NEAR(bath.moment(1.0), 0.1 / pi * 20.0, 1e-12);
  EXPECT_NEAR(recurrence_time(bath), 2.0 * pi / bath.width.front(), 1e-12);
}

TEST(Evolve, StepGuard) {
  const auto bath = discretize_bath(ohmic(50.0 * pi), 100);
  try {
    evolve_coefficients(kUnit, bath, 1, TimeGrid{0.01, 3}, 0.01);
    FAIL() << "expected StepTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StepTooLarge);
  }
  EXPECT_THROW(evolve_coefficients(kUnit, bath, 1, TimeGrid{0.005, 3}, 0.002), Error);
}

TEST(Evolve, DecoupledStringKeepsItsEnergy) {
  const auto bath = discretize_bath(CouplingSpec::none(5.0), 200);
  const double t_end = 100.0 / pi;
  const auto run = evolve_coefficients(kUnit, bath, 1, TimeGrid{0.02, static_cast<std::size_t>(t_end / 0.02) + 2}, 0.002);
  for (std::size_t i = 0; i < run.t_grid.count; ++i) {
    EXPECT_NEAR(run.string_energy[i] / pi, 1.0, 1e-10);
    EXPECT_EQ(run.reservoir_energy[i], 0.0);
    EXPECT_LT(run.ccr_defect[i], 1e-10);
  }
  EXPECT_NEAR(std::abs(fit_decay_rate(run, {2.0, 30.0})), 0.0, 1e-8);
}

TEST(Evolve, MatchesFreeSolutionWithoutCoupling) {
  const StringParams p{2.0, 3.0, 1.5, 0.0};
  const auto bath = discretize_bath(CouplingSpec::none(20.0), 10);
  const auto run = evolve_coefficients(p, bath, 2, TimeGrid{0.01, 501}, 0.001);
  const double w = mode_frequency(p, 2);
  const double kappa = 1.0 / std::sqrt(p.length * p.lambda * w);
  for (std::size_t i = 0; i < run.t_grid.count; i += 50) {
    const cd expect = kappa * std::polar(1.0, -w * run.t_grid.time(i));
    EXPECT_LT(std::abs(run.c_A[i] - expect), 1e-9);
    EXPECT_LT(std::abs(run.alpha[i] - std::polar(1.0, -w * run.t_grid.time(i))), 1e-9);
    EXPECT_LT(std::abs(run.alpha_dag[i]), 1e-11);
  }
}

TEST(Evolve, CcrPreservedAndIntegratorConverges) {
  const auto& run = reference_run();
  EXPECT_LT(*std::max_element(run.ccr_defect.begin(), run.ccr_defect.end()), 1e-6);

  // Fourth order: halving the step cuts the deviation from a fine run by ~16.
  const auto bath = discretize_bath(ohmic(50.0 * pi), 200);
  const TimeGrid tg{0.02, 251};
  const auto fine = evolve_coefficients(kUnit, bath, 1, tg, 0.0005);
  const auto a = evolve_coefficients(kUnit, bath, 1, tg, 0.002);
  const auto b = evolve_coefficients(kUnit, bath, 1, tg, 0.001);
  const auto ea = (a.final_column - fine.final_column).norm();
  const auto eb = (b.final_column - fine.final_column).norm();
  EXPECT_GT(ea / eb, 12.0);
  EXPECT_LT(ea / eb, 20.0);
}

TEST(Evolve, EnergyBudgetCloses) {
  const auto& run = reference_run();
  double max_share = 0.0;
  for (std::size_t i = 0; i < run.t_grid.count; ++i) {
    const double total = run.string_energy[i] + run.interaction_energy[i] + run.reservoir_energy[i];
    // RK4 slowly damps the fastest bath modes (|R| = 1 - (w h)^6 / 144 per step).
    EXPECT_NEAR(total / pi, 1.0, 2e-5) << run.t_grid.time(i);
    if (run.t_grid.time(i) >= slip_time(kUnit)) {
      max_share = std::max(max_share, std::abs(run.interaction_energy[i]) / pi);
    }
  }
  EXPECT_LT(max_share, 0.02);
  EXPECT_NEAR(run.string_energy[0], pi, 1e-13);
  // String loss reappears in the reservoir up to the small interaction share.
  const std::size_t k = run.t_grid.index_of(40.0);
  EXPECT_NEAR(run.reservoir_energy[k] / (pi - run.string_energy[k]), 1.0, 0.02);
}

TEST(Evolve, EnergyDriftIsIntegratorError) {
  const auto bath = discretize_bath(ohmic(50.0 * pi), 2000);
  const auto drift = [&](double step) {
    const auto run = evolve_coefficients(kUnit, bath, 1, TimeGrid{0.02, 501}, step);
    const std::size_t k = run.t_grid.count - 1;
    return std::abs(run.string_energy[k] + run.interaction_energy[k] + run.reservoir_energy[k] - pi);
  };
  const double coarse = drift(0.002);
  const double fine = drift(0.001);
  EXPECT_LT(coarse, 1e-5);
  EXPECT_GT(coarse / fine, 16.0);
}

TEST(Fit, OhmicNumberDecayEqualsGoldenRule) {
  const auto& run = reference_run();
  const double rate = fit_decay_rate(run, {5.0, 70.0});
  const double golden = emission_rate(kUnit, ohmic(50.0 * pi), 1).rate;
  EXPECT_NEAR(rate / golden, 1.0, 0.05);
  EXPECT_NEAR(rate / 0.05, 1.0, 0.02);
}

TEST(Fit, InsensitiveToCutoffDoubling) {
  // Same spacing as the reference run with half the cutoff.
  const auto half = evolve_coefficients(kUnit, discretize_bath(ohmic(25.0 * pi), 1000), 1, TimeGrid{0.02, 3601}, 0.002);
  const double a = fit_decay_rate(half, {5.0, 70.0});
  const double b = fit_decay_rate(reference_run(), {5.0, 70.0});
  EXPECT_NEAR(b / a, 1.0, 0.02);
}

TEST(Fit, WindowGuards) {
  const auto& run = reference_run();
  EXPECT_NEAR(run.recurrence, 80.0, 1e-12);
  try {
    fit_decay_rate(run, {0.5, 50.0});
    FAIL() << "expected WindowOutsideRun";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowOutsideRun);
  }
  try {
    fit_decay_rate(run, {5.0, 75.0});
    FAIL() << "expected WindowOutsideRun";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowOutsideRun);
  }
  const auto bath = discretize_bath(ohmic(50.0 * pi), 500);
  const auto short_run = evolve_coefficients(kUnit, bath, 1, TimeGrid{0.02, 1501}, 0.002);
  try {
    fit_decay_rate(short_run, {5.0, 25.0});
    FAIL() << "expected RecurrenceContamination";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RecurrenceContamination);
  }
}

TEST(Fit, RefinementDoesNotWorsenAgreement) {
  const double golden = 0.05;
  const auto coarse = evolve_coefficients(kUnit, discretize_bath(ohmic(50.0 * pi), 1000), 1, TimeGrid{0.02, 1901}, 0.002);
  const double e_coarse = std::abs(fit_decay_rate(coarse, {5.0, 38.0}) / golden - 1.0);
  const double e_fine = std::abs(fit_decay_rate(reference_run(), {5.0, 38.0}) / golden - 1.0);
  EXPECT_LE(e_fine, e_coarse + 1e-3);
}

TEST(Fit, GaussianTabulatedCouplingMatchesGoldenRule) {
  std::vector<std::pair<double, double>> table;
  for (int i = 1; i <= 80; ++i) {
    const double w = 0.1 * i;
    table.emplace_back(w, 5e-5 * std::exp(-0.5 * (w - pi) * (w - pi)));
  }
  const auto spec = CouplingSpec::tabulated(table, 8.0);
  const StringParams p{1.0, 1.0, 1.0, 0.0};
  const double golden = emission_rate(p, spec, 1).rate;
  const auto run = evolve_coefficients(p, discretize_bath(spec, 800), 1, TimeGrid{0.05, 2001}, 0.01);
  const double rate = fit_decay_rate(run, {5.0, 95.0});
  EXPECT_NEAR(rate / golden, 1.0, 0.05);
}

}  // namespace
