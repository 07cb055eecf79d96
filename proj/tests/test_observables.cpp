#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dstring/observables.hpp"

using namespace dstring;

namespace {

const StringParams kUnit{1.0, 1.0, 1.0, 0.1};

CoefficientSolution ohmic_mode(const StringParams& p, int n, const TimeGrid& tg) {
  const auto spec = CouplingSpec::paper_ohmic(p.beta, p.length, 50.0 * mode_frequency(p, 1));
  const auto c = DampingConvention::KernelConsistent;
  return mode_solution(p, spec, n, tg, mode_frequency_grid(p, spec, n, c), c);
}

TEST(StringAsymptote, Values) {
  EXPECT_EQ(string_energy_asymptotic(kUnit, StringFockState::vacuum()), 0.0);
  const double one = string_energy_asymptotic(kUnit, StringFockState::single(1));
  EXPECT_NEAR(one, 3.97887357729738339e-4, 1e-18);
  const StringParams doubled{1.0, 1.0, 1.0, 0.2};
  EXPECT_NEAR(string_energy_asymptotic(doubled, StringFockState::single(1)) / one, 4.0, 1e-14);
  EXPECT_NEAR(string_energy_asymptotic(kUnit, StringFockState({{1, 2}, {3, 1}})),
              0.01 / 8.0 * (2.0 / pi + 1.0 / (3.0 * pi)), 1e-18);
}

TEST(LorentzianIntegrals, QuadratureMatchesClosedForm) {
  for (double w : {pi, 2 * pi, 3 * pi, 0.7, 25.0}) {
    const auto c = lorentzian_integrals_closed(w, 0.1, 1.0);
    const auto q = lorentzian_integrals_quadrature(w, 0.1, 1.0);
    EXPECT_NEAR(q.i1 / c.i1, 1.0, 1e-8) << w;
    EXPECT_NEAR(q.i2 / c.i2, 1.0, 1e-8) << w;
  }
  const auto c = lorentzian_integrals_closed(pi, 0.1, 1.0);
  EXPECT_NEAR(c.i1, 1.5915494309189534, 1e-15);  // 5/pi
  EXPECT_NEAR(c.i2, 5.0 * pi, 1e-14);
}

TEST(LorentzianIntegrals, HeavierDampingStillAgrees) {
  const auto c = lorentzian_integrals_closed(2.0, 1.5, 0.8);
  const auto q = lorentzian_integrals_quadrature(2.0, 1.5, 0.8);
  EXPECT_NEAR(q.i1 / c.i1, 1.0, 1e-8);
  EXPECT_NEAR(q.i2 / c.i2, 1.0, 1e-8);
}

TEST(ReservoirAsymptote, HalfQuantumPerPhonon) {
  EXPECT_EQ(reservoir_energy_asymptotic(kUnit, StringFockState::vacuum()), 0.0);
  EXPECT_NEAR(reservoir_energy_asymptotic(kUnit, StringFockState::single(1)), pi / 2.0, 1e-14);
  for (int m = 1; m <= 3; ++m) {
    const auto s = StringFockState::single(m);
    const double closed = reservoir_energy_asymptotic(kUnit, s, EnergyMethod::ClosedForm);
    const double quad = reservoir_energy_asymptotic(kUnit, s, EnergyMethod::Quadrature);
    EXPECT_NEAR(quad / closed, 1.0, 1e-6);
    EXPECT_NEAR(closed / (m * pi / 2.0), 1.0, 1e-12);
  }
}

TEST(ReservoirAsymptote, AdditiveOverPhonons) {
  const double a = reservoir_energy_asymptotic(kUnit, StringFockState::single(1, 2));
  const double b = reservoir_energy_asymptotic(kUnit, StringFockState::single(2));
  const double ab = reservoir_energy_asymptotic(kUnit, StringFockState({{1, 2}, {2, 1}}));
  EXPECT_NEAR(ab, a + b, 1e-13);
  EXPECT_NEAR(a, 2.0 * reservoir_energy_asymptotic(kUnit, StringFockState::single(1)), 1e-13);
  EXPECT_THROW(reservoir_energy_asymptotic(kUnit, StringFockState::single(1), EnergyMethod::Contraction), Error);
}

TEST(StringEnergySeries, StartsAtPhononEnergy) {
  const TimeGrid tg{0.5, 5};
  std::vector<CoefficientSolution> sols{ohmic_mode(kUnit, 1, tg), ohmic_mode(kUnit, 2, tg)};
  const auto r = string_energy_timeseries(sols, StringFockState({{1, 2}, {2, 1}}));
  EXPECT_NEAR(r.string_energy[0], 2 * pi + 2 * pi, 1e-13);
  EXPECT_EQ(r.method, EnergyMethod::Contraction);
  EXPECT_NEAR(r.asymptote_reservoir, pi + pi, 1e-13);
  EXPECT_THROW(string_energy_timeseries(sols, StringFockState::single(3)), Error);
}

TEST(StringEnergySeries, ConstantForClosedSystem) {
  const StringParams free{1.0, 1.0, 1.0, 0.0};
  const TimeGrid tg{0.37, 300};
  std::vector<CoefficientSolution> sols{mode_solution(free, CouplingSpec::none(), 1, tg, gauss_grid(0.0, 5.0, 2))};
  const auto r = string_energy_timeseries(sols, StringFockState::single(1, 3));
  for (double e : r.string_energy) EXPECT_NEAR(e / (3 * pi), 1.0, 1e-10);
  EXPECT_EQ(r.asymptote_string, 0.0);
}

TEST(StringEnergySeries, MatchesDiscreteBathReference) {
  // Reference values from an independent discretized-bath integration
  // (2000 bath modes, cutoff 50 pi), in units of pi.
  const TimeGrid tg{0.1, 601};
  std::vector<CoefficientSolution> sols{ohmic_mode(kUnit, 1, tg)};
  const auto r = string_energy_timeseries(sols, StringFockState::single(1));
  EXPECT_NEAR(r.string_energy[tg.index_of(10.0)] / pi, 0.6065, 1e-3);
  EXPECT_NEAR(r.string_energy[tg.index_of(60.0)] / pi, 0.04984, 1e-4);
}

TEST(StringEnergySeries, LongTimeTailApproachesAsymptote) {
  const TimeGrid tg{2.0, 251};
  std::vector<CoefficientSolution> sols{ohmic_mode(kUnit, 1, tg)};
  const auto r = string_energy_timeseries(sols, StringFockState::single(1));
  EXPECT_NEAR(r.string_energy.back() / r.asymptote_string, 1.0, 0.02);
  for (double e : r.string_energy) EXPECT_GE(e, 0.0);
}

TEST(StringEnergySeries, EnvelopeDecaysAtKernelRate) {
  const double wd = std::sqrt(pi * pi - 0.000625);
  const double half_period = pi / wd;
  const std::size_t per = 40;
  const TimeGrid tg{half_period / per, per * 60 + 1};
  std::vector<CoefficientSolution> sols{ohmic_mode(kUnit, 1, tg)};
  const auto r = string_energy_timeseries(sols, StringFockState::single(1));
  for (std::size_t start = 0; start + per < tg.count; start += 5 * per) {
    double mean = 0.0, tmid = 0.0;
    for (std::size_t k = 0; k < per; ++k) {
      mean += r.string_energy[start + k] / per;
      tmid += tg.time(start + k) / per;
    }
    const double envelope = pi * std::exp(-0.05 * tmid) + r.asymptote_string;
    EXPECT_NEAR(mean / envelope, 1.0, 0.05) << tmid;
  }
}

}  // namespace
