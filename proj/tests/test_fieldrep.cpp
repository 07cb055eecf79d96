#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dstring/fieldrep.hpp"

using namespace dstring;

namespace {

std::vector<double> linear_grid(double a, double b, std::size_t n) {
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return r;
}

TEST(SourceShapes, ZeroCoupling) {
  const auto s = source_shapes(CouplingSpec::none(10.0), {0.0, 0.5, 3.0});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.P[i], 0.0);
    EXPECT_EQ(s.Q[i], 0.0);
  }
}

TEST(SourceShapes, CutoffRequired) {
  try {
    source_shapes(CouplingSpec::paper_ohmic(0.1, 1.0), {0.0});
    FAIL() << "expected CutoffRequired";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CutoffRequired);
  }
}

TEST(SourceShapes, OhmicCentreValue) {
  // Integrand 4 pi sqrt(beta / (8 pi^2 (2pi)^3 L)) w, antiderivative ~ Lambda^2 / 2.
  const double beta = 0.1, L = 1.0;
  for (double cutoff : {10.0, 20.0, 50.0 * pi}) {
    const auto s = source_shapes(CouplingSpec::paper_ohmic(beta, L, cutoff), {0.0});
    const double c = 4.0 * pi * std::sqrt(beta / (8.0 * pi * pi * std::pow(2.0 * pi, 3) * L));
    EXPECT_NEAR(s.P[0] / (c * cutoff * cutoff / 2.0), 1.0, 1e-10) << cutoff;
  }
}

TEST(SourceShapes, OhmicClosedFormAwayFromOrigin) {
  // With w sinc(w r) = sin(w r) / r the integral is c (1 - cos(Lambda r)) / r^2.
  const double cutoff = 10.0;
  const auto r = linear_grid(0.05, 20.0, 40);
  const auto s = source_shapes(CouplingSpec::paper_ohmic(0.1, 1.0, cutoff), r);
  const double c = 4.0 * pi * std::sqrt(0.1 / (8.0 * pi * pi * std::pow(2.0 * pi, 3)));
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double expect = c * (1.0 - std::cos(cutoff * r[i])) / (r[i] * r[i]);
    EXPECT_NEAR(s.P[i], expect, 1e-10 * c * cutoff * cutoff) << r[i];
  }
}

TEST(SourceShapes, RealCouplingHasNoQ) {
  const std::vector<CouplingSpec> specs{CouplingSpec::paper_ohmic(0.1, 1.0, 30.0),
                                        CouplingSpec::power_law(0.3, -1.5, 15.0),
                                        CouplingSpec::tabulated({{0.5, 0.1}, {4.0, 0.3}, {9.0, 0.0}})};
  for (const auto& spec : specs) {
    const auto s = source_shapes(spec, linear_grid(0.0, 10.0, 25));
    for (double q : s.Q) EXPECT_EQ(q, 0.0);
  }
}

TEST(SourceShapes, FarFieldDecaysFasterThanInverseRadius) {
  // Over the last decade, the per-block maximum of |P| r keeps shrinking.
  const auto spec = CouplingSpec::tabulated({{0.5, 0.2}, {2.0, 0.4}, {5.0, 0.1}, {8.0, 0.0}});
  const auto r = linear_grid(10.0, 100.0, 901);
  const auto s = source_shapes(spec, r);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start + 100 <= r.size(); start += 100) {
    double block = 0.0;
    for (std::size_t i = start; i < start + 100; ++i) block = std::max(block, std::abs(s.P[i]) * r[i]);
    EXPECT_LT(block, previous) << r[start];
    previous = block;
  }
  EXPECT_LT(previous, 0.1 * std::abs(s.P[0]) * r[0]);
}

TEST(HamiltonianIdentity, ZeroField) {
  const PeriodicBox box{2.0, 8};
  EXPECT_EQ(field_energy(box, {}), 0.0);
  EXPECT_EQ(bath_hamiltonian_identity(CouplingSpec::none(50.0), box, {FieldSample{}}), 0.0);
}

TEST(HamiltonianIdentity, SinglePlaneWave) {
  const PeriodicBox box{2.0, 8};
  const FieldSample wave{{{1, 2, 0}, cd(0.7, -0.4)}};
  const double w = box.wavenumber({1, 2, 0});
  EXPECT_NEAR(mode_energy(box, wave), w * 0.65, 1e-15);
  EXPECT_NEAR(field_energy(box, wave) / (w * 0.65), 1.0, 1e-12);
  EXPECT_LT(bath_hamiltonian_identity(CouplingSpec::paper_ohmic(0.1, 1.0, 50.0), box, {wave}), 1e-10);
}

TEST(HamiltonianIdentity, OpposedPairCrossTermsCancel) {
  const PeriodicBox box{1.5, 8};
  const FieldSample pair{{{1, 0, 2}, cd(0.3, 0.2)}, {{-1, 0, -2}, cd(-0.5, 0.9)}};
  EXPECT_LT(bath_hamiltonian_identity(CouplingSpec::none(100.0), box, {pair}), 1e-12);
}

TEST(HamiltonianIdentity, RandomBandLimitedFields) {
  const PeriodicBox box{3.0, 12};
  const double cutoff = 12.0;
  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> gauss;
  std::vector<FieldSample> samples;
  for (int trial = 0; trial < 5; ++trial) {
    FieldSample s;
    for (int x = -5; x <= 5; ++x) {
      for (int y = -5; y <= 5; ++y) {
        for (int z = -5; z <= 5; ++z) {
          const double k = box.wavenumber({x, y, z});
          if (k == 0.0 || k >= cutoff) continue;
          if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) > 0.2) continue;
          s.push_back({{x, y, z}, cd(gauss(rng), gauss(rng))});
        }
      }
    }
    samples.push_back(std::move(s));
  }
  EXPECT_LT(bath_hamiltonian_identity(CouplingSpec::paper_ohmic(0.1, 1.0, cutoff), box, samples), 1e-8);
}

TEST(HamiltonianIdentity, Preconditions) {
  const PeriodicBox box{2.0, 8};
  const auto spec = CouplingSpec::none(5.0);
  EXPECT_THROW(bath_hamiltonian_identity(spec, box, {{{{0, 0, 0}, 1.0}}}), Error);
  EXPECT_THROW(bath_hamiltonian_identity(spec, box, {{{{3, 3, 3}, 1.0}}}), Error);
  try {
    bath_hamiltonian_identity(CouplingSpec::none(100.0), box, {{{{4, 0, 0}, 1.0}}});
    FAIL() << "expected GridTooCoarse";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooCoarse);
  }
}

TEST(HamiltonianIdentity, TransformIsOrthonormal) {
  const PeriodicBox box{2.0, 8};
  std::vector<std::array<int, 3>> modes;
  for (int x = -3; x <= 3; ++x) {
    for (int y = -3; y <= 3; y += 2) modes.push_back({x, y, (x * y) % 4});
  }
  EXPECT_LT(transform_orthonormality_defect(box, modes), 1e-10);
}

}  // namespace
