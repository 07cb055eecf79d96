#pragma once

// Normal-ordered string and reservoir energies: closed-form asymptotes, the
// Lorentzian integrals behind the reservoir energy, and time series obtained by
// contracting coefficient solutions against a string Fock state.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dstring/dynamics.hpp"
#include "dstring/error.hpp"
#include "dstring/model.hpp"
#include "dstring/quadrature.hpp"

namespace dstring {

enum class EnergyMethod { ClosedForm, Quadrature, Contraction };

struct EnergyReport {
  TimeGrid t_grid;
  std::vector<double> string_energy;
  double asymptote_string = 0.0;
  double asymptote_reservoir = 0.0;
  EnergyMethod method = EnergyMethod::Contraction;
};

/// (beta^2 / 8 lambda^2) sum_i r_i / w_{m_i}.
inline double string_energy_asymptotic(const StringParams& params, const StringFockState& state) {
  params.validate();
  const double h = params.beta / params.lambda;
  double sum = 0.0;
  for (const auto& o : state.occupation()) {
    const double w = mode_frequency(params, o.mode);
    require(w > 0.5 * h, ErrorKind::OverdampedMode, "mode " + std::to_string(o.mode) + " is overdamped");
    sum += o.count / w;
  }
  return h * h / 8.0 * sum;
}

struct LorentzianIntegrals {
  double i1 = 0.0;  // int_0^inf dx / ((w^2 - x^2)^2 + b^2 x^2)
  double i2 = 0.0;  // int_0^inf x^2 dx / (same)
};

/// Closed forms with b = beta/lambda: I1 = pi/(2 b w^2), I2 = pi/(2 b).
inline LorentzianIntegrals lorentzian_integrals_closed(double omega, double beta, double lambda) {
  require(omega > 0.0 && beta > 0.0 && lambda > 0.0, ErrorKind::InvalidArgument,
          "Lorentzian integrals need omega, beta, lambda > 0");
  const double b = beta / lambda;
  return {pi / (2.0 * b * omega * omega), pi / (2.0 * b)};
}

/// Same integrals by adaptive quadrature after x = w tan(theta), which maps the
/// half line onto [0, pi/2) and the resonance onto theta = pi/4.
inline LorentzianIntegrals lorentzian_integrals_quadrature(double omega, double beta, double lambda,
                                                           double rel_tol = 1e-8) {
  require(omega > 0.0 && beta > 0.0 && lambda > 0.0, ErrorKind::InvalidArgument,
          "Lorentzian integrals need omega, beta, lambda > 0");
  const double b = beta / lambda;
  const auto denom = [&](double x) {
    const double d = (omega - x) * (omega + x);
    return d * d + b * b * x * x;
  };
  const auto g1 = [&](double th) {
    const double c = std::cos(th);
    const double x = omega * std::tan(th);
    return omega / (c * c) / denom(x);
  };
  const auto g2 = [&](double th) {
    const double c = std::cos(th);
    const double x = omega * std::tan(th);
    return omega / (c * c) * x * x / denom(x);
  };
  // Half width of the peak in theta is about b / (4 w); bracket it with breakpoints.
  const double width = b / (4.0 * omega);
  std::vector<double> cuts{0.0};
  for (double k : {-64.0, -8.0, -1.0, 0.0, 1.0, 8.0, 64.0}) {
    const double c = pi / 4.0 + k * width;
    if (c > cuts.back() && c < pi / 2.0) cuts.push_back(c);
  }
  cuts.push_back(pi / 2.0);
  LorentzianIntegrals out;
  QuadResult q1, q2;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto a = integrate(g1, cuts[i], cuts[i + 1], 1e-10);
    const auto c = integrate(g2, cuts[i], cuts[i + 1], 1e-10);
    q1.value += a.value;
    q1.error += a.error;
    q1.l1 += a.l1;
    q2.value += c.value;
    q2.error += c.error;
    q2.l1 += c.l1;
  }
  if (!q1.converged(rel_tol) || !q2.converged(rel_tol)) {
    fail(ErrorKind::QuadratureDivergence, "Lorentzian integrals did not converge");
  }
  out.i1 = q1.value;
  out.i2 = q2.value;
  return out;
}

/// (beta / 2 pi lambda) sum_i r_i [w^3 I1(w) + w I2(w)]; the closed form gives w/2 per phonon.
inline double reservoir_energy_asymptotic(const StringParams& params, const StringFockState& state,
                                          EnergyMethod method = EnergyMethod::ClosedForm) {
  params.validate();
  require(method != EnergyMethod::Contraction, ErrorKind::InvalidArgument,
          "reservoir asymptote supports closed_form or quadrature");
  if (state.is_vacuum()) return 0.0;
  if (params.beta == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& o : state.occupation()) {
    const double w = mode_frequency(params, o.mode);
    require(w > params.beta / (2.0 * params.lambda), ErrorKind::OverdampedMode,
            "mode " + std::to_string(o.mode) + " is overdamped");
    const auto li = method == EnergyMethod::ClosedForm ? lorentzian_integrals_closed(w, params.beta, params.lambda)
                                                       : lorentzian_integrals_quadrature(w, params.beta, params.lambda);
    sum += o.count * (w * w * w * li.i1 + w * li.i2);
  }
  return params.beta / (2.0 * pi * params.lambda) * sum;
}

/// Normal-ordered <:H_s:>(t) for one mode holding r phonons, reservoir in vacuum:
/// (L/4 lambda) 2r|B coeff|^2 + (L lambda w^2/4) 2r|A coeff|^2.
inline double mode_string_energy(const CoefficientSolution& sol, std::size_t j, int count) {
  const double L = sol.params.length;
  const double lam = sol.params.lambda;
  const double w = sol.omega_n;
  return 2.0 * count * (L / (4.0 * lam) * std::norm(sol.p_a[j]) + L * lam * w * w / 4.0 * std::norm(sol.c_a[j]));
}

/// Contracts per-mode solutions against |state> (x) |0>. Every occupied mode needs
/// a solution, all on the same time grid.
inline EnergyReport string_energy_timeseries(std::span<const CoefficientSolution> sols, const StringFockState& state) {
  require(!sols.empty(), ErrorKind::InvalidArgument, "no coefficient solutions supplied");
  const TimeGrid grid = sols.front().t_grid;
  const StringParams& params = sols.front().params;
  EnergyReport r;
  r.t_grid = grid;
  r.method = EnergyMethod::Contraction;
  r.string_energy.assign(grid.count, 0.0);
  for (const auto& o : state.occupation()) {
    const CoefficientSolution* sol = nullptr;
    for (const auto& s : sols) {
      require(s.t_grid.dt == grid.dt && s.t_grid.count == grid.count, ErrorKind::InvalidArgument,
              "coefficient solutions use different time grids");
      if (s.mode == o.mode) sol = &s;
    }
    require(sol != nullptr, ErrorKind::InvalidArgument, "no solution for occupied mode " + std::to_string(o.mode));
    for (std::size_t j = 0; j < grid.count; ++j) r.string_energy[j] += mode_string_energy(*sol, j, o.count);
  }
  r.asymptote_string = string_energy_asymptotic(params, state);
  r.asymptote_reservoir = reservoir_energy_asymptotic(params, state);
  return r;
}

}  // namespace dstring
