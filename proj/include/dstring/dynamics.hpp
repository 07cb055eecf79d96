#pragma once

// Exact per-mode Heisenberg solutions in coefficient form.
//
// The dynamics is linear, so every operator at time t is a fixed linear
// combination of the initial operators {a_n(0), a_n^+(0), b_n(0;w), b_n^+(0;w)}.
// A solution stores those coefficients on a time grid; bath coefficients are
// radial densities per d^3k, integrated with the measure 4 pi w^2 dw.
//
// With A_n = (a + a^+)/sqrt(L lambda w_n) and B_n = i sqrt(lambda w_n / L)(a^+ - a):
//   A_n'' + rate A_n' + w_n^2 A_n = zeta_n(t)
//   A_n(t) = E(t) (A_n(0) - M_n(0)) + S(t) (A_n'(0) - M_n'(0)) + M_n(t)
//   E = e^{-rate t/2}(cos W t + rate/(2W) sin W t),  S = e^{-rate t/2} sin(W t)/W
//   M_n density on b(0;w):  i w f(w) / (lambda D(w)) e^{-i w t},  D = w_n^2 - w^2 - i rate w
//   A_n'(0) = (B_n(0) - R_n(0)) / lambda,  B_n(t) = B_n(0) - lambda w_n^2 int_0^t A_n.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dstring/error.hpp"
#include "dstring/model.hpp"
#include "dstring/parallel.hpp"
#include "dstring/quadrature.hpp"

namespace dstring {

/// Which friction coefficient multiplies A_n' in the closed-form solution.
///
/// KernelConsistent: beta/(2 lambda). The Ohmic kernel tends to beta*delta(t)
///   and the convolution over [0, t] keeps half the delta; this is the rate the
///   exact coupled dynamics produces and the one that preserves [A_n, B_n].
/// FullWeight: beta/lambda, the full-weight reading of the delta.
enum class DampingConvention { KernelConsistent, FullWeight };

inline double damping_rate(const StringParams& p, DampingConvention c) {
  return c == DampingConvention::FullWeight ? p.beta / p.lambda : 0.5 * p.beta / p.lambda;
}

/// D(w_k) = w_n^2 - w_k^2 - i rate w_k.
inline cd resonant_denominator(const StringParams& p, int n, double omega_k, DampingConvention c) {
  const double wn = mode_frequency(p, n);
  return {wn * wn - omega_k * omega_k, -damping_rate(p, c) * omega_k};
}

struct CoefficientSolution {
  StringParams params;
  int mode = 1;
  double omega_n = 0.0;
  double rate = 0.0;          // friction coefficient of A_n'
  double omega_damped = 0.0;  // sqrt(w_n^2 - rate^2/4)
  DampingConvention convention = DampingConvention::KernelConsistent;
  TimeGrid t_grid;
  FrequencyGrid omega_grid;

  // Coefficients of a_n(0), a_n^+(0) in A_n(t), A_n'(t) and B_n(t).
  std::vector<cd> c_a, c_adag;
  std::vector<cd> c_a_dot, c_adag_dot;
  std::vector<cd> p_a, p_adag;

  // Stationary drive M_n(0): density m(w) on b(0;w); conj(m) on b^+(0;w).
  std::vector<cd> drive;

  // Densities on b(0;w), b^+(0;w); rows follow omega_grid, columns t_grid.
  Eigen::MatrixXcd u, v;
  Eigen::MatrixXcd u_dot, v_dot;
  Eigen::MatrixXcd p_u, p_v;

  /// Radial measure 4 pi w^2 times the quadrature weight of node i.
  double measure(std::size_t i) const {
    const double w = omega_grid.nodes[i];
    return 4.0 * pi * w * w * omega_grid.weights[i];
  }
};

namespace detail {

struct DampedBasis {
  double E, S, F;     // E(t), S(t), S'(t)
  double IE, IS;      // int_0^t E, int_0^t S
};

inline DampedBasis damped_basis(double rate, double omega_damped, double t) {
  const cd p(-0.5 * rate, omega_damped);
  const cd e = std::exp(p * t);
  const cd ip = exp_integral(p, t);
  const double k = rate / (2.0 * omega_damped);
  DampedBasis b;
  b.S = e.imag() / omega_damped;
  b.E = e.real() + k * e.imag();
  b.F = e.real() - k * e.imag();
  b.IS = ip.imag() / omega_damped;
  b.IE = ip.real() + k * ip.imag();
  return b;
}

inline void check_mode(const StringParams& params, const CouplingSpec& spec, int n, DampingConvention c) {
  params.validate();
  require(n >= 1, ErrorKind::InvalidArgument, "mode index must be >= 1");
  const double wn = mode_frequency(params, n);
  const double rate = damping_rate(params, c);
  if (!(wn > 0.5 * rate)) fail(ErrorKind::OverdampedMode, "mode " + std::to_string(n) + " is overdamped");
  if (rate == 0.0 && !spec.is_zero()) {
    fail(ErrorKind::InvalidArgument, "undamped mode with non-zero coupling has no stationary solution");
  }
}

inline void check_grid(const StringParams& params, const CouplingSpec& spec, int n, const FrequencyGrid& grid,
                       DampingConvention c) {
  require(grid.size() >= 2 && grid.nodes.size() == grid.weights.size(), ErrorKind::InvalidArgument,
          "frequency grid needs >= 2 nodes");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid.nodes[i] > 0.0, ErrorKind::InvalidArgument, "frequency grid must lie in (0, cutoff]");
    if (i) require(grid.nodes[i] > grid.nodes[i - 1], ErrorKind::InvalidArgument, "frequency nodes must increase");
  }
  if (spec.is_zero()) return;
  const double end = spec.upper_limit("mode_solution");
  require(grid.upper() <= end * (1.0 + 1e-12), ErrorKind::InvalidArgument, "frequency grid exceeds the cutoff");
  const double wn = mode_frequency(params, n);
  const double half_width = 0.5 * damping_rate(params, c);
  if (wn < end) {
    const double spacing = grid.max_spacing(wn - half_width, wn + half_width);
    if (!(spacing > 0.0) || spacing > half_width) {
      fail(ErrorKind::GridTooCoarse, "frequency spacing " + std::to_string(spacing) +
                                         " does not resolve the resonance width " + std::to_string(half_width));
    }
  }
}

}  // namespace detail

/// Frequency grid refined around w_n with `points_per_width` nodes per resonance width.
inline FrequencyGrid mode_frequency_grid(const StringParams& params, const CouplingSpec& spec, int n,
                                         DampingConvention c, double far_spacing = 0.05,
                                         double points_per_width = 20.0) {
  ResonanceGridSpec g;
  g.cutoff = spec.upper_limit("mode_frequency_grid");
  g.center = mode_frequency(params, n);
  g.width = damping_rate(params, c);
  g.far_spacing = far_spacing;
  g.points_per_width = points_per_width;
  return resonance_grid(g);
}

inline CoefficientSolution mode_solution(const StringParams& params, const CouplingSpec& spec, int n,
                                         const TimeGrid& t_grid, const FrequencyGrid& omega_grid,
                                         DampingConvention convention = DampingConvention::KernelConsistent) {
  detail::check_mode(params, spec, n, convention);
  t_grid.validate();
  detail::check_grid(params, spec, n, omega_grid, convention);

  CoefficientSolution s;
  s.params = params;
  s.mode = n;
  s.convention = convention;
  s.t_grid = t_grid;
  s.omega_grid = omega_grid;
  s.omega_n = mode_frequency(params, n);
  s.rate = damping_rate(params, convention);
  s.omega_damped = std::sqrt((s.omega_n - 0.5 * s.rate) * (s.omega_n + 0.5 * s.rate));

  const double lam = params.lambda;
  const double wn = s.omega_n;
  const double kappa = 1.0 / std::sqrt(params.length * lam * wn);
  const std::size_t nt = t_grid.count;
  const std::size_t nw = omega_grid.size();
  const cd I(0.0, 1.0);

  // Stationary drive density m(w) and the initial-velocity bath coefficient -f/lambda.
  std::vector<cd> m(nw), f_over(nw);
  for (std::size_t i = 0; i < nw; ++i) {
    const double w = omega_grid.nodes[i];
    const cd f = eval_coupling(spec, w);
    const cd d(wn * wn - w * w, -s.rate * w);
    m[i] = f == 0.0 ? cd{} : I * w * f / (lam * d);
    f_over[i] = -f / lam;
  }
  s.drive = m;

  s.c_a.resize(nt);
  s.c_adag.resize(nt);
  s.c_a_dot.resize(nt);
  s.c_adag_dot.resize(nt);
  s.p_a.resize(nt);
  s.p_adag.resize(nt);
  for (auto* mat : {&s.u, &s.v, &s.u_dot, &s.v_dot, &s.p_u, &s.p_v}) mat->resize(nw, nt);

  parallel_for(nt, [&](std::size_t j) {
    const double t = t_grid.time(j);
    const auto b = detail::damped_basis(s.rate, s.omega_damped, t);

    s.c_a[j] = kappa * cd(b.E, -wn * b.S);
    s.c_adag[j] = kappa * cd(b.E, wn * b.S);
    s.c_a_dot[j] = kappa * cd(-wn * wn * b.S, -wn * b.F);
    s.c_adag_dot[j] = kappa * cd(-wn * wn * b.S, wn * b.F);
    s.p_a[j] = cd(0.0, -lam * wn * kappa) - lam * wn * wn * kappa * cd(b.IE, -wn * b.IS);
    s.p_adag[j] = cd(0.0, lam * wn * kappa) - lam * wn * wn * kappa * cd(b.IE, wn * b.IS);

    for (std::size_t i = 0; i < nw; ++i) {
      const double w = omega_grid.nodes[i];
      const cd mi = m[i];
      const cd mc = std::conj(mi);
      const cd ph = std::polar(1.0, -w * t);
      const cd vel_u = f_over[i] + I * w * mi;
      const cd vel_v = std::conj(f_over[i]) - I * w * mc;
      s.u(i, j) = -b.E * mi + b.S * vel_u + mi * ph;
      s.v(i, j) = -b.E * mc + b.S * vel_v + mc * std::conj(ph);
      s.u_dot(i, j) = wn * wn * b.S * mi + b.F * vel_u - I * w * mi * ph;
      s.v_dot(i, j) = wn * wn * b.S * mc + b.F * vel_v + I * w * mc * std::conj(ph);
      s.p_u(i, j) = -lam * wn * wn * (-b.IE * mi + b.IS * vel_u + mi * exp_integral(cd(0.0, -w), t));
      s.p_v(i, j) = -lam * wn * wn * (-b.IE * mc + b.IS * vel_v + mc * exp_integral(cd(0.0, w), t));
    }
  });
  return s;
}

/// |[A_n(t), B_n(t)] - 2i/L| evaluated from the coefficient representation.
inline double ccr_defect(const CoefficientSolution& sol, double t) {
  const std::size_t j = sol.t_grid.index_of(t);
  cd comm = sol.c_a[j] * sol.p_adag[j] - sol.c_adag[j] * sol.p_a[j];
  for (std::size_t i = 0; i < sol.omega_grid.size(); ++i) {
    comm += sol.measure(i) * (sol.u(i, j) * sol.p_v(i, j) - sol.v(i, j) * sol.p_u(i, j));
  }
  return std::abs(comm - cd(0.0, 2.0 / sol.params.length));
}

/// Coefficients of a_n(0) and a_n^+(0) in the ladder operator a_n(t).
struct LadderCoefficients {
  cd on_a;
  cd on_adag;
};

inline LadderCoefficients ladder_coefficients(const CoefficientSolution& sol, std::size_t j) {
  const double L = sol.params.length;
  const double lam = sol.params.lambda;
  const double wn = sol.omega_n;
  const double ka = std::sqrt(L * lam * wn);
  const cd kb(0.0, std::sqrt(L / (lam * wn)));
  return {0.5 * (ka * sol.c_a[j] + kb * sol.p_a[j]), 0.5 * (ka * sol.c_adag[j] + kb * sol.p_adag[j])};
}

/// Coefficients of the bath operator b_n(t; k) for one radial frequency w_k.
struct BathModeSolution {
  double omega_k = 0.0;
  TimeGrid t_grid;
  FrequencyGrid omega_grid;
  std::vector<cd> diag;           // on b(0; k): exp(-i w_k t)
  std::vector<cd> c_a, c_adag;    // on a_n(0), a_n^+(0)
  Eigen::MatrixXcd u, v;          // densities on b(0; w'), b^+(0; w')
};

/// b(t;k) = b(0;k) e^{-i w_k t} + i f*(w_k) (L/2) int_0^t e^{-i w_k (t-s)} A_n'(s) ds,
/// with the time integrals done in closed form. At long times the a_n(0), a_n^+(0)
/// coefficients approach the stationary resonant form
///   -i f*(w_k) (L/2) e^{-i w_k t} (w_n^2 X + i w_k Y) / D(w_k),
/// X, Y being the coefficients of A_n(0) - M_n(0) and A_n'(0) - M_n'(0).
inline BathModeSolution bath_mode_solution(const StringParams& params, const CouplingSpec& spec, int n,
                                           double omega_k, const TimeGrid& t_grid, const FrequencyGrid& omega_grid,
                                           DampingConvention convention = DampingConvention::KernelConsistent) {
  detail::check_mode(params, spec, n, convention);
  t_grid.validate();
  detail::check_grid(params, spec, n, omega_grid, convention);
  require(omega_k > 0.0, ErrorKind::InvalidArgument, "bath frequency must be > 0");

  const double lam = params.lambda;
  const double wn = mode_frequency(params, n);
  const double rate = damping_rate(params, convention);
  const double wd = std::sqrt((wn - 0.5 * rate) * (wn + 0.5 * rate));
  const double kappa = 1.0 / std::sqrt(params.length * lam * wn);
  const cd I(0.0, 1.0);
  const cd p(-0.5 * rate, wd);
  const cd pc = std::conj(p);
  const cd drive = I * std::conj(eval_coupling(spec, omega_k)) * (0.5 * params.length);

  const std::size_t nt = t_grid.count;
  const std::size_t nw = omega_grid.size();
  BathModeSolution out;
  out.omega_k = omega_k;
  out.t_grid = t_grid;
  out.omega_grid = omega_grid;
  out.diag.resize(nt);
  out.c_a.resize(nt);
  out.c_adag.resize(nt);
  out.u.resize(nw, nt);
  out.v.resize(nw, nt);

  std::vector<cd> m(nw), f_over(nw);
  for (std::size_t i = 0; i < nw; ++i) {
    const double w = omega_grid.nodes[i];
    const cd f = eval_coupling(spec, w);
    m[i] = f == 0.0 ? cd{} : I * w * f / (lam * cd(wn * wn - w * w, -rate * w));
    f_over[i] = -f / lam;
  }

  parallel_for(nt, [&](std::size_t j) {
    const double t = t_grid.time(j);
    const cd back = std::polar(1.0, -omega_k * t);
    const cd xp = exp_integral(p + I * omega_k, t);
    const cd xm = exp_integral(pc + I * omega_k, t);
    // J[g] = e^{-i w_k t} int_0^t e^{i w_k s} g(s) ds for g = S and g = S'.
    const cd js = back * (xp - xm) / (2.0 * I * wd);
    const cd jf = back * (p * xp - pc * xm) / (2.0 * I * wd);
    out.diag[j] = back;
    out.c_a[j] = drive * kappa * (-wn * wn * js - I * wn * jf);
    out.c_adag[j] = drive * kappa * (-wn * wn * js + I * wn * jf);
    for (std::size_t i = 0; i < nw; ++i) {
      const double w = omega_grid.nodes[i];
      const cd mi = m[i];
      const cd mc = std::conj(mi);
      const cd je_u = back * exp_integral(I * (omega_k - w), t);
      const cd je_v = back * exp_integral(I * (omega_k + w), t);
      out.u(i, j) = drive * (wn * wn * js * mi + jf * (f_over[i] + I * w * mi) - I * w * mi * je_u);
      out.v(i, j) = drive * (wn * wn * js * mc + jf * (std::conj(f_over[i]) - I * w * mc) + I * w * mc * je_v);
    }
  });
  return out;
}

}  // namespace dstring
