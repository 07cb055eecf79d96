#pragma once

// First-order (golden-rule) transition rates of the string in vacuum, Fock and
// thermal reservoirs, and the diagonal of the reduced string density matrix.
//
// Rates are probabilities per unit time; probability(t) gives the raw
// linear-in-t weight. The trace rules for the thermal bath are
//   Tr_B[b rho b^+] -> exp(-w/kT),  Tr_B[b^+ rho b] -> 1,
// taken as stated; ThermalRule::BoseEinstein swaps in the standard occupation
// numbers for comparison.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dstring/error.hpp"
#include "dstring/model.hpp"

namespace dstring {

struct RateReport {
  std::string channel;
  double rate = 0.0;
  double analytic = 0.0;
  double broadening = 0.0;  // Lorentzian half-width, Fock channels only

  double probability(double t) const { return rate * t; }
  double rel_err() const {
    if (analytic == 0.0) return rate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(rate - analytic) / std::abs(analytic);
  }
};

enum class ThermalRule { Boltzmann, BoseEinstein };

inline constexpr double kDefaultBroadening = 1e-3;  // epsilon / w_nu

namespace detail {

inline std::string arrow(const StringFockState& from, const StringFockState& to) {
  return from.label() + " -> " + to.label();
}

inline double golden_rule(const StringParams& p, const CouplingSpec& spec, double w) {
  return 2.0 * p.length * pi * pi * w * w * w * spec.spectral_weight(w) / p.lambda;
}

inline bool same_length(const StringParams& p, const CouplingSpec& spec) {
  return spec.ohmic_length() == p.length;
}

}  // namespace detail

/// Normalized Lorentzian of half-width eps.
inline double lorentzian_delta(double x, double eps) { return eps / (pi * (x * x + eps * eps)); }

/// 2 L pi^2 w_m^3 |f(w_m)|^2 / lambda; beta/(2 lambda) for the Ohmic coupling.
inline RateReport emission_rate(const StringParams& params, const CouplingSpec& spec, int m) {
  params.validate();
  require(m >= 1, ErrorKind::InvalidArgument, "mode index must be >= 1");
  const double w = mode_frequency(params, m);
  if (w > spec.support_end()) {
    fail(ErrorKind::CutoffExceeded, "mode " + std::to_string(m) + " lies above the coupling cutoff");
  }
  RateReport r;
  const auto from = StringFockState::single(m);
  r.channel = "emission " + detail::arrow(from, StringFockState::vacuum());
  r.rate = detail::golden_rule(params, spec, w);
  r.analytic = r.rate;
  if (spec.kind() == CouplingKind::PaperOhmic && detail::same_length(params, spec)) {
    r.analytic = spec.ohmic_beta() / (2.0 * params.lambda);
  }
  return r;
}

/// (pi L w_nu / 2 lambda) sum_r |f(w_p_r)|^2 delta_eps(w_p_r - w_nu) over the quanta of field nu.
inline RateReport absorption_rate_fock(const StringParams& params, const CouplingSpec& spec,
                                       const ReservoirSpec& reservoir, int nu,
                                       double broadening_factor = kDefaultBroadening) {
  params.validate();
  require(reservoir.kind == ReservoirKind::FockQuanta && !reservoir.quanta.empty(), ErrorKind::InvalidArgument,
          "absorption_rate_fock needs a non-empty Fock reservoir");
  require(nu >= 1, ErrorKind::InvalidArgument, "target mode must be >= 1");
  require(broadening_factor > 0.0, ErrorKind::InvalidArgument, "broadening must be > 0");
  const double wn = mode_frequency(params, nu);
  const double eps = broadening_factor * wn;
  const bool ohmic = spec.kind() == CouplingKind::PaperOhmic && detail::same_length(params, spec);
  double sum = 0.0, ohmic_sum = 0.0;
  for (const auto& q : reservoir.quanta) {
    if (q.field != nu) continue;
    const double d = lorentzian_delta(q.omega - wn, eps);
    sum += spec.spectral_weight(q.omega) * d;
    if (ohmic && q.omega <= spec.support_end()) ohmic_sum += d / (q.omega * q.omega * q.omega);
  }
  RateReport r;
  r.channel = "fock absorption " + detail::arrow(StringFockState::vacuum(), StringFockState::single(nu));
  r.broadening = eps;
  r.rate = pi * params.length * wn / (2.0 * params.lambda) * sum;
  r.analytic = ohmic ? spec.ohmic_beta() * wn / (8.0 * pi * params.lambda) * ohmic_sum : r.rate;
  return r;
}

/// Thermal occupation factor multiplying the golden-rule rate of an absorption channel.
inline double thermal_absorption_factor(double omega, double kT, ThermalRule rule) {
  require(kT > 0.0, ErrorKind::InvalidArgument, "kT must be > 0");
  const double x = omega / kT;
  return rule == ThermalRule::Boltzmann ? std::exp(-x) : 1.0 / std::expm1(x);
}

inline double thermal_emission_factor(double omega, double kT, ThermalRule rule) {
  return rule == ThermalRule::Boltzmann ? 1.0 : 1.0 + thermal_absorption_factor(omega, kT, rule);
}

/// emission_rate(m) * exp(-w_m / kT); the Bose-Einstein variant uses 1/(exp(w/kT) - 1).
inline RateReport absorption_rate_thermal(const StringParams& params, const CouplingSpec& spec, double kT, int m,
                                          ThermalRule rule = ThermalRule::Boltzmann) {
  require(kT > 0.0 && std::isfinite(kT), ErrorKind::InvalidArgument, "kT must be > 0");
  const RateReport e = emission_rate(params, spec, m);
  const double factor = thermal_absorption_factor(mode_frequency(params, m), kT, rule);
  RateReport r;
  r.channel = std::string(rule == ThermalRule::Boltzmann ? "thermal absorption " : "thermal absorption (Bose-Einstein) ") +
              detail::arrow(StringFockState::vacuum(), StringFockState::single(m));
  r.rate = e.rate * factor;
  r.analytic = e.analytic * factor;
  return r;
}

struct DensityEntry {
  StringFockState state;
  double weight = 0.0;
  int string_change = 0;  // phonons added to the string
  int bath_change = 0;    // quanta added to the reservoir
  std::string channel;
};

struct DensityOptions {
  int n_max = 0;                                  // absorption targets for a thermal bath
  double broadening_factor = kDefaultBroadening;  // Fock delta regularization
  ThermalRule rule = ThermalRule::Boltzmann;
};

/// Diagonal of Tr_B rho_I(t) to first order in the coupling, long-time form.
/// The first entry is the initial state with weight 1; every other entry is
/// reached by one emission (string -1, bath +1) or one absorption (string +1, bath -1).
/// Weights are the per-channel transition probabilities without bosonic
/// enhancement factors, as in the golden-rule expressions above.
inline std::vector<DensityEntry> reduced_density_diagonal(const StringParams& params, const CouplingSpec& spec,
                                                          const StringFockState& initial,
                                                          const ReservoirSpec& reservoir, double t,
                                                          const DensityOptions& options = {}) {
  params.validate();
  require(t >= 0.0 && std::isfinite(t), ErrorKind::InvalidArgument, "time must be >= 0");
  std::vector<DensityEntry> out;
  out.push_back({initial, 1.0, 0, 0, "initial"});
  if (t == 0.0) return out;

  const auto add = [&](const StringFockState& to, double weight, int ds, const std::string& name) {
    if (weight == 0.0) return;
    for (auto& e : out) {
      if (e.state == to && e.string_change == ds) {
        e.weight += weight;
        return;
      }
    }
    out.push_back({to, weight, ds, -ds, name});
  };

  for (const auto& o : initial.occupation()) {
    const double w = mode_frequency(params, o.mode);
    if (w > spec.support_end()) continue;
    double rate = emission_rate(params, spec, o.mode).rate;
    if (reservoir.kind == ReservoirKind::Thermal) rate *= thermal_emission_factor(w, reservoir.kT, options.rule);
    const auto to = initial.shifted(o.mode, -1);
    add(to, rate * t, -1, "emission " + detail::arrow(initial, to));
  }

  if (reservoir.kind == ReservoirKind::FockQuanta) {
    std::vector<int> fields;
    for (const auto& q : reservoir.quanta) {
      if (std::find(fields.begin(), fields.end(), q.field) == fields.end()) fields.push_back(q.field);
    }
    std::sort(fields.begin(), fields.end());
    for (int nu : fields) {
      const double rate = absorption_rate_fock(params, spec, reservoir, nu, options.broadening_factor).rate;
      const auto to = initial.shifted(nu, +1);
      add(to, rate * t, +1, "fock absorption " + detail::arrow(initial, to));
    }
  } else if (reservoir.kind == ReservoirKind::Thermal) {
    require(options.n_max >= 1, ErrorKind::InvalidArgument, "thermal reservoir needs n_max >= 1");
    for (int nu = 1; nu <= options.n_max; ++nu) {
      const double w = mode_frequency(params, nu);
      if (w > spec.support_end()) break;
      const double rate = absorption_rate_thermal(params, spec, reservoir.kT, nu, options.rule).rate;
      const auto to = initial.shifted(nu, +1);
      add(to, rate * t, +1, "thermal absorption " + detail::arrow(initial, to));
    }
  }
  return out;
}

}  // namespace dstring
