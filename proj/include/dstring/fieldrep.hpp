#pragma once

// Reservoir as sourced massless scalar fields: the radial source shapes P and Q,
// and a periodic-box check that the mode maps turn sum_k w_k |b_k|^2 into the
// field energy  int (Pi^2 + |grad Y|^2) / 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dstring/error.hpp"
#include "dstring/kernel.hpp"
#include "dstring/model.hpp"
#include "dstring/parallel.hpp"
#include "dstring/quadrature.hpp"

namespace dstring {

struct SourceShapes {
  std::vector<double> r_grid;
  std::vector<double> P;
  std::vector<double> Q;
};

/// P(r) = int_0^Lambda 4 pi w^2 sqrt(w / 2(2pi)^3) Re f(w) sinc(w r) dw,
/// Q(r) = int_0^Lambda 4 pi w^2 Im f(w) sinc(w r) / sqrt(2(2pi)^3 w) dw.
inline SourceShapes source_shapes(const CouplingSpec& spec, const std::vector<double>& r_grid) {
  const double upper = spec.cutoff().value_or(spec.support_end());
  if (!std::isfinite(upper)) fail(ErrorKind::CutoffRequired, "source_shapes needs a finite cutoff");
  for (double r : r_grid) require(r >= 0.0 && std::isfinite(r), ErrorKind::InvalidArgument, "radii must be >= 0");
  SourceShapes out;
  out.r_grid = r_grid;
  out.P.assign(r_grid.size(), 0.0);
  out.Q.assign(r_grid.size(), 0.0);
  if (spec.is_zero()) return out;
  const double norm = 2.0 * std::pow(2.0 * pi, 3);
  parallel_for(r_grid.size(), [&](std::size_t i) {
    const double r = r_grid[i];
    const auto p = integrate_spectral(spec, upper, r, [&](double w) {
      return 4.0 * pi * w * w * std::sqrt(w / norm) * eval_coupling(spec, w).real() * sinc(w * r);
    });
    const auto q = integrate_spectral(spec, upper, r, [&](double w) {
      return 4.0 * pi * w * w / std::sqrt(norm * w) * eval_coupling(spec, w).imag() * sinc(w * r);
    });
    require(p.converged(kKernelAcceptTol) && q.converged(kKernelAcceptTol), ErrorKind::QuadratureDivergence,
            "source shape quadrature did not converge at r = " + std::to_string(r));
    out.P[i] = p.value;
    out.Q[i] = q.value;
  });
  return out;
}

/// Cubic box of side `side` sampled on points^3 nodes; wave vectors are 2 pi n / side.
struct PeriodicBox {
  double side = 1.0;
  int points = 8;

  double volume() const { return side * side * side; }
  double wavenumber(const std::array<int, 3>& n) const {
    const double s = 2.0 * pi / side;
    return s * std::sqrt(static_cast<double>(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]));
  }
};

struct PlaneWave {
  std::array<int, 3> n{};  // integer wave vector
  cd amplitude;            // classical value of b_k
};

using FieldSample = std::vector<PlaneWave>;

namespace detail {

inline void check_sample(const CouplingSpec& spec, const PeriodicBox& box, const FieldSample& sample) {
  const double upper = spec.cutoff().value_or(spec.support_end());
  for (const auto& m : sample) {
    const double k = box.wavenumber(m.n);
    require(k > 0.0, ErrorKind::InvalidArgument, "the zero wave vector has no massless mode");
    require(k < upper, ErrorKind::InvalidArgument, "test field is not band-limited below the cutoff");
    for (int c : m.n) {
      require(2 * std::abs(c) < box.points, ErrorKind::GridTooCoarse, "box grid aliases the quadratic energy");
    }
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      require(sample[i].n != sample[j].n, ErrorKind::InvalidArgument, "repeated wave vector in test field");
    }
  }
}

}  // namespace detail

/// sum_k w_k |b_k|^2.
inline double mode_energy(const PeriodicBox& box, const FieldSample& sample) {
  double e = 0.0;
  for (const auto& m : sample) e += box.wavenumber(m.n) * std::norm(m.amplitude);
  return e;
}

/// Field energy on the grid with Y = sum (b e^{ikx} + c.c.) / sqrt(2 w V) and
/// Pi = i sum sqrt(w / 2V) (b^* e^{-ikx} - b e^{ikx}).
inline double field_energy(const PeriodicBox& box, const FieldSample& sample) {
  const int N = box.points;
  const double h = box.side / N;
  const double V = box.volume();
  const double s = 2.0 * pi / box.side;
  const std::size_t total = static_cast<std::size_t>(N) * N * N;
  std::vector<double> density(total, 0.0);
  parallel_for(total, [&](std::size_t idx) {
    const int ix = static_cast<int>(idx / (N * N));
    const int iy = static_cast<int>((idx / N) % N);
    const int iz = static_cast<int>(idx % N);
    double pi_field = 0.0;
    std::array<double, 3> grad{};
    for (const auto& m : sample) {
      const double w = box.wavenumber(m.n);
      // Integer phase keeps the grid exactly periodic.
      const double phase = 2.0 * pi * static_cast<double>(m.n[0] * ix + m.n[1] * iy + m.n[2] * iz) / N;
      const cd z = m.amplitude * std::polar(1.0, phase);
      pi_field += 2.0 * std::sqrt(w / (2.0 * V)) * z.imag();
      for (int c = 0; c < 3; ++c) grad[c] += -2.0 * s * m.n[c] * z.imag() / std::sqrt(2.0 * w * V);
    }
    density[idx] = 0.5 * (pi_field * pi_field + grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]);
  });
  double sum = 0.0;
  for (double d : density) sum += d;
  return sum * h * h * h;
}

/// Largest relative mismatch between field_energy and mode_energy over the samples
/// (absolute when the mode energy vanishes).
inline double bath_hamiltonian_identity(const CouplingSpec& spec, const PeriodicBox& box,
                                        const std::vector<FieldSample>& samples) {
  require(box.side > 0.0 && box.points >= 2, ErrorKind::InvalidArgument, "invalid periodic box");
  double worst = 0.0;
  for (const auto& sample : samples) {
    detail::check_sample(spec, box, sample);
    const double lhs = field_energy(box, sample);
    const double rhs = mode_energy(box, sample);
    const double defect = rhs > 0.0 ? std::abs(lhs - rhs) / rhs : std::abs(lhs);
    worst = std::max(worst, defect);
  }
  return worst;
}

/// max |<e_k, e_k'> - delta_kk'| for the normalized grid plane waves e^{ikx} / N^(3/2).
inline double transform_orthonormality_defect(const PeriodicBox& box, const std::vector<std::array<int, 3>>& modes) {
  const int N = box.points;
  const double norm = 1.0 / (static_cast<double>(N) * N * N);
  double worst = 0.0;
  for (std::size_t a = 0; a < modes.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      cd acc = 0.0;
      for (int ix = 0; ix < N; ++ix) {
        for (int iy = 0; iy < N; ++iy) {
          for (int iz = 0; iz < N; ++iz) {
            const int dn = (modes[a][0] - modes[b][0]) * ix + (modes[a][1] - modes[b][1]) * iy +
                           (modes[a][2] - modes[b][2]) * iz;
            acc += std::polar(1.0, 2.0 * pi * dn / N);
          }
        }
      }
      const double target = a == b ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(acc * norm - target));
    }
  }
  return worst;
}

}  // namespace dstring
