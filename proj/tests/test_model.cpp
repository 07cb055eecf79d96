#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "dstring/model.hpp"

using namespace dstring;

namespace {

StringParams unit_string(double beta) { return {1.0, 1.0, 1.0, beta}; }

TEST(Spectrum, FrequenciesAreMultiplesOfPi) {
  const auto s = build_spectrum(unit_string(0.1), 3);
  ASSERT_EQ(s.omega.size(), 3u);
  EXPECT_DOUBLE_EQ(s.at(1), pi);
  EXPECT_DOUBLE_EQ(s.at(2), 2 * pi);
  EXPECT_DOUBLE_EQ(s.at(3), 3 * pi);
}

TEST(Spectrum, UndampedShiftIsIdentity) {
  const auto s = build_spectrum(unit_string(0.0), 1);
  EXPECT_EQ(s.shifted_at(1), s.at(1));
}

TEST(Spectrum, ShiftedFrequencyMatchesExtendedPrecision) {
  using big = boost::multiprecision::cpp_bin_float_50;
  const big exact = boost::multiprecision::sqrt(boost::math::constants::pi<big>() *
                                                    boost::math::constants::pi<big>() -
                                                big("0.0025"));
  const auto s = build_spectrum(unit_string(0.1), 1);
  EXPECT_NEAR(s.shifted_at(1), static_cast<double>(exact), 1e-15);
  EXPECT_NEAR(s.shifted_at(1), 3.14119474103236054, 1e-15);
}

TEST(Spectrum, DispersionIsLinearAndShiftConsistent) {
  const StringParams p{0.7, 2.3, 1.9, 0.4};
  const auto s = build_spectrum(p, 25);
  const double h = p.beta / (2 * p.lambda);
  for (int n = 1; n <= 25; ++n) {
    EXPECT_NEAR(s.at(n) / n, s.at(1), 1e-14 * s.at(1));
    EXPECT_NEAR(s.shifted_at(n) * s.shifted_at(n) + h * h, s.at(n) * s.at(n), 1e-13 * s.at(n) * s.at(n));
    EXPECT_LT(s.shifted_at(n), s.at(n));
    if (n > 1) {
      EXPECT_GT(s.at(n), s.at(n - 1));
    }
  }
}

TEST(Spectrum, RejectsOverdampedModes) {
  try {
    build_spectrum(unit_string(2.0 * pi + 1e-9), 2);
    FAIL() << "expected OverdampedMode";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OverdampedMode);
  }
  EXPECT_THROW(build_spectrum(unit_string(0.1), 0), Error);
  EXPECT_THROW(build_spectrum(StringParams{-1.0, 1.0, 1.0, 0.0}, 1), Error);
}

TEST(Coupling, OhmicValue) {
  const auto spec = CouplingSpec::paper_ohmic(0.1, 1.0, 10.0);
  EXPECT_NEAR(eval_coupling(spec, 1.0).real(), 0.0503292121044870350, 1e-16);
  EXPECT_EQ(eval_coupling(spec, 1.0).imag(), 0.0);
}

TEST(Coupling, OhmicSquaredRecoversBeta) {
  const double beta = 0.137, L = 2.5, cutoff = 40.0;
  const auto spec = CouplingSpec::paper_ohmic(beta, L, cutoff);
  for (double w = 0.1; w <= cutoff; w *= 1.37) {
    const double f = eval_coupling(spec, w).real();
    EXPECT_NEAR(f * f * 4 * pi * pi * L * w * w * w / beta, 1.0, 1e-12) << w;
  }
}

TEST(Coupling, ZeroAboveCutoff) {
  for (const auto& spec : {CouplingSpec::paper_ohmic(0.1, 1.0, 5.0), CouplingSpec::power_law(2.0, 1.0, 5.0),
                           CouplingSpec::tabulated({{1.0, 1.0}, {10.0, 1.0}}, 5.0)}) {
    EXPECT_EQ(eval_coupling(spec, 5.0 + 1e-9), cd(0.0));
    EXPECT_EQ(eval_coupling(spec, 100.0), cd(0.0));
    EXPECT_GT(std::abs(eval_coupling(spec, 4.0)), 0.0);
  }
}

TEST(Coupling, PowerLaw) {
  const auto spec = CouplingSpec::power_law(1.0, -3.0, 10.0);
  EXPECT_NEAR(eval_coupling(spec, 2.0).real(), 0.353553390593273762, 1e-16);
}

TEST(Coupling, TabulatedInterpolatesSquaredModulus) {
  const auto spec = CouplingSpec::tabulated({{3.0, 9.0}, {1.0, 1.0}, {2.0, 4.0}});
  EXPECT_DOUBLE_EQ(spec.spectral_weight(1.5), 2.5);
  EXPECT_DOUBLE_EQ(spec.spectral_weight(2.0), 4.0);
  EXPECT_EQ(spec.spectral_weight(0.5), 0.0);
  EXPECT_EQ(spec.spectral_weight(3.5), 0.0);
  EXPECT_DOUBLE_EQ(spec.support_end(), 3.0);
}

TEST(Coupling, TabulatedRejectsNegativeWeights) {
  try {
    CouplingSpec::tabulated({{1.0, 1.0}, {2.0, -0.5}});
    FAIL() << "expected NonIntegrableCoupling";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonIntegrableCoupling);
  }
}

TEST(Coupling, CutoffPolicy) {
  EXPECT_THROW(CouplingSpec::paper_ohmic(0.1, 1.0).upper_limit("x"), Error);
  EXPECT_NO_THROW(CouplingSpec::none().upper_limit("x"));
  EXPECT_TRUE(CouplingSpec::none().is_zero());
  EXPECT_THROW(eval_coupling(CouplingSpec::none(), 0.0), Error);
  EXPECT_THROW(CouplingSpec::paper_ohmic(0.1, 1.0, -1.0), Error);
}

TEST(Reservoir, Invariants) {
  EXPECT_EQ(ReservoirSpec::vacuum().kind, ReservoirKind::Vacuum);
  EXPECT_THROW(ReservoirSpec::fock({}), Error);
  EXPECT_THROW(ReservoirSpec::fock({{0, 1.0}}), Error);
  EXPECT_THROW(ReservoirSpec::thermal(0.0), Error);
  EXPECT_EQ(ReservoirSpec::thermal(2.0).kT, 2.0);
}

TEST(FockState, SortsAndShifts) {
  const StringFockState s({{3, 1}, {1, 2}});
  EXPECT_EQ(s.occupation().front().mode, 1);
  EXPECT_EQ(s.count(1), 2);
  EXPECT_EQ(s.count(2), 0);
  EXPECT_EQ(s.shifted(1, -2), StringFockState::single(3));
  EXPECT_EQ(s.shifted(2, 1).count(2), 1);
  EXPECT_EQ(s.label(), "|1^2,3^1>");
  EXPECT_EQ(StringFockState::vacuum().label(), "|0>");
  EXPECT_THROW(s.check_modes(2), Error);
  EXPECT_THROW(StringFockState({{1, 0}}), Error);
  EXPECT_THROW(StringFockState({{1, 1}, {1, 2}}), Error);
}

TEST(TimeGrid, IndexLookup) {
  const TimeGrid g{0.1, 101};
  EXPECT_EQ(g.index_of(5.0), 50u);
  EXPECT_NEAR(g.end(), 10.0, 1e-12);
  EXPECT_THROW(g.index_of(0.05), Error);
  EXPECT_THROW(g.index_of(10.1), Error);
}

}  // namespace
