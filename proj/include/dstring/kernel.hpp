#pragma once

// Memory kernel gamma(t), its running integral, and the vacuum noise correlator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "dstring/error.hpp"
#include "dstring/model.hpp"
#include "dstring/parallel.hpp"
#include "dstring/quadrature.hpp"

namespace dstring {

inline constexpr double kKernelRelTol = 1e-11;
inline constexpr double kKernelAcceptTol = 1e-9;

/// integral_0^upper g(w) dw over oscillation-bounded panels, split at the kinks of |f|^2.
template <class G>
QuadResult integrate_spectral(const CouplingSpec& spec, double upper, double t, G&& g) {
  QuadResult total;
  double lo = 0.0;
  auto bps = spec.breakpoints();
  bps.push_back(upper);
  for (double hi : bps) {
    hi = std::min(hi, upper);
    if (hi <= lo) continue;
    const QuadResult part = integrate_panels(g, lo, hi, oscillation_panel_width(t), kKernelRelTol);
    total.value += part.value;
    total.error += part.error;
    total.l1 += part.l1;
    lo = hi;
  }
  return total;
}

struct KernelSample {
  TimeGrid t_grid;
  std::vector<double> gamma;
  double cutoff_used = 0.0;
};

/// gamma(t) = 4 pi L int_0^Lambda |f(w)|^2 w^3 cos(w t) dw, with L the string length.
inline double gamma_at(const CouplingSpec& spec, double length, double t) {
  if (spec.is_zero()) return 0.0;
  require(spec.integrable_at_zero(3.0), ErrorKind::NonIntegrableCoupling, "|f|^2 w^3 is not integrable at w = 0");
  const double upper = spec.upper_limit("gamma_kernel");
  const auto integrand = [&](double w) { return spec.spectral_weight(w) * w * w * w * std::cos(w * t); };
  const QuadResult q = integrate_spectral(spec, upper, t, integrand);
  require(q.converged(kKernelAcceptTol), ErrorKind::QuadratureDivergence,
          "gamma quadrature did not converge at t = " + std::to_string(t));
  return 4.0 * pi * length * q.value;
}

inline KernelSample gamma_kernel(const CouplingSpec& spec, const TimeGrid& grid, double length) {
  grid.validate();
  require(length > 0.0, ErrorKind::InvalidArgument, "string length must be > 0");
  KernelSample out;
  out.t_grid = grid;
  out.cutoff_used = spec.is_zero() ? spec.cutoff().value_or(0.0) : spec.upper_limit("gamma_kernel");
  out.gamma.assign(grid.count, 0.0);
  parallel_for(grid.count, [&](std::size_t i) { out.gamma[i] = gamma_at(spec, length, grid.time(i)); });
  return out;
}

/// Closed form of gamma for the Ohmic coupling truncated at `cutoff`: (beta/pi) sin(cutoff t)/t.
inline double ohmic_gamma_closed_form(double beta, double cutoff, double t) {
  const long double x = static_cast<long double>(cutoff) * static_cast<long double>(t);
  if (std::abs(x) < 1e-4L) return beta / pi * cutoff * static_cast<double>(1.0L - x * x / 6.0L);
  return beta / pi * static_cast<double>(std::sin(x) / static_cast<long double>(t));
}

/// Trapezoid integral of the sampled kernel over [0, T]; T need not be a grid point.
///
/// For the Ohmic coupling this tends to beta/2 as cutoff*T grows: the kernel
/// approaches beta*delta(t) and only half of the delta lies inside [0, T].
inline double gamma_integral(const KernelSample& sample, double T) {
  const auto& g = sample.gamma;
  require(!g.empty(), ErrorKind::InvalidArgument, "empty kernel sample");
  require(T >= 0.0 && T <= sample.t_grid.end() * (1.0 + 1e-12), ErrorKind::InvalidArgument,
          "T lies outside the kernel time grid");
  const double dt = sample.t_grid.dt;
  const double x = std::min(T / dt, static_cast<double>(g.size() - 1));
  const auto whole = static_cast<std::size_t>(std::floor(x));
  double sum = 0.0;
  for (std::size_t i = 0; i < whole; ++i) sum += 0.5 * dt * (g[i] + g[i + 1]);
  const double frac = x - static_cast<double>(whole);
  if (frac > 0.0 && whole + 1 < g.size()) {
    const double end_value = g[whole] + frac * (g[whole + 1] - g[whole]);
    sum += 0.5 * frac * dt * (g[whole] + end_value);
  }
  return sum;
}

/// Vacuum two-time correlator of the per-mode noise,
/// <0| xi_n(t) xi_n(t') |0> = 4 pi int_0^Lambda w^4 |f|^2 exp(-i w tau) dw, tau = t - t'.
inline std::complex<double> noise_correlator(const CouplingSpec& spec, double tau) {
  if (spec.is_zero()) return {0.0, 0.0};
  require(spec.integrable_at_zero(4.0), ErrorKind::NonIntegrableCoupling, "|f|^2 w^4 is not integrable at w = 0");
  const double upper = spec.upper_limit("noise_correlator");
  const auto re =
      integrate_spectral(spec, upper, tau, [&](double w) { return spec.spectral_weight(w) * std::pow(w, 4) * std::cos(w * tau); });
  const auto im =
      integrate_spectral(spec, upper, tau, [&](double w) { return -spec.spectral_weight(w) * std::pow(w, 4) * std::sin(w * tau); });
  require(re.converged(kKernelAcceptTol) && im.converged(kKernelAcceptTol), ErrorKind::QuadratureDivergence,
          "noise correlator quadrature did not converge");
  return 4.0 * pi * std::complex<double>(re.value, im.value);
}

}  // namespace dstring
