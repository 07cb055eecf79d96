#pragma once

// Physical parameters, mode spectrum, coupling functions and the state
// descriptors shared by every other module. Units: hbar = c = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dstring/error.hpp"

namespace dstring {

using cd = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Mass density, tension, length and damping coefficient of the string.
struct StringParams {
  double lambda = 1.0;
  double mu = 1.0;
  double length = 1.0;
  double beta = 0.0;

  void validate() const {
    require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::InvalidArgument, "string.lambda must be > 0");
    require(mu > 0.0 && std::isfinite(mu), ErrorKind::InvalidArgument, "string.mu must be > 0");
    require(length > 0.0 && std::isfinite(length), ErrorKind::InvalidArgument, "string.length must be > 0");
    require(beta >= 0.0 && std::isfinite(beta), ErrorKind::InvalidArgument, "string.beta must be >= 0");
  }
};

/// omega_n = sqrt(mu/lambda) n pi / L.
inline double mode_frequency(const StringParams& p, int n) {
  return std::sqrt(p.mu / p.lambda) * n * pi / p.length;
}

struct ModeSpectrum {
  int n_max = 0;
  std::vector<double> omega;          // index n-1
  std::vector<double> omega_shifted;  // sqrt(omega^2 - beta^2 / (4 lambda^2))

  double at(int n) const { return omega.at(static_cast<std::size_t>(n - 1)); }
  double shifted_at(int n) const { return omega_shifted.at(static_cast<std::size_t>(n - 1)); }
};

inline ModeSpectrum build_spectrum(const StringParams& params, int n_max) {
  params.validate();
  require(n_max >= 1, ErrorKind::InvalidArgument, "n_max must be >= 1");
  const double half_rate = params.beta / (2.0 * params.lambda);
  ModeSpectrum s;
  s.n_max = n_max;
  s.omega.reserve(n_max);
  s.omega_shifted.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    const double w = mode_frequency(params, n);
    if (!(w > half_rate)) {
      fail(ErrorKind::OverdampedMode, "mode " + std::to_string(n) + " has omega_n <= beta/(2 lambda)");
    }
    s.omega.push_back(w);
    s.omega_shifted.push_back(std::sqrt((w - half_rate) * (w + half_rate)));
  }
  return s;
}

enum class CouplingKind { PaperOhmic, PowerLaw, Tabulated };

/// The coupling function f(omega) with an optional ultraviolet cutoff.
///
/// PaperOhmic(beta, L):  |f|^2 = beta / (4 pi^2 L omega^3)
/// PowerLaw(C, p):       |f|^2 = C omega^p
/// Tabulated:            piecewise-linear |f|^2 between (omega, |f|^2) samples,
///                       zero outside the sampled range.
///
/// f itself is the real non-negative root of |f|^2.
class CouplingSpec {
 public:
  static CouplingSpec paper_ohmic(double beta, double length, std::optional<double> cutoff = std::nullopt) {
    require(beta >= 0.0, ErrorKind::InvalidArgument, "coupling beta must be >= 0");
    require(length > 0.0, ErrorKind::InvalidArgument, "coupling length must be > 0");
    CouplingSpec s(CouplingKind::PaperOhmic, cutoff);
    s.a_ = beta;
    s.b_ = length;
    return s;
  }

  static CouplingSpec power_law(double prefactor, double exponent, std::optional<double> cutoff = std::nullopt) {
    require(prefactor >= 0.0, ErrorKind::NonIntegrableCoupling, "power-law prefactor must be >= 0");
    CouplingSpec s(CouplingKind::PowerLaw, cutoff);
    s.a_ = prefactor;
    s.b_ = exponent;
    return s;
  }

  /// samples are (omega, |f(omega)|^2) pairs.
  static CouplingSpec tabulated(std::vector<std::pair<double, double>> samples,
                                std::optional<double> cutoff = std::nullopt) {
    require(samples.size() >= 2, ErrorKind::InvalidArgument, "tabulated coupling needs >= 2 samples");
    std::sort(samples.begin(), samples.end());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      require(samples[i].first > 0.0, ErrorKind::InvalidArgument, "tabulated frequencies must be > 0");
      require(samples[i].second >= 0.0, ErrorKind::NonIntegrableCoupling, "tabulated |f|^2 entries must be >= 0");
      if (i > 0) {
        require(samples[i].first > samples[i - 1].first, ErrorKind::InvalidArgument,
                "tabulated frequencies must be distinct");
      }
    }
    CouplingSpec s(CouplingKind::Tabulated, cutoff);
    s.table_ = std::move(samples);
    return s;
  }

  /// f identically zero.
  static CouplingSpec none(std::optional<double> cutoff = std::nullopt) { return power_law(0.0, 0.0, cutoff); }

  CouplingKind kind() const { return kind_; }
  std::optional<double> cutoff() const { return cutoff_; }

  double ohmic_beta() const { return a_; }
  double ohmic_length() const { return b_; }
  double prefactor() const { return a_; }
  double exponent() const { return b_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }

  bool is_zero() const {
    switch (kind_) {
      case CouplingKind::PaperOhmic: return a_ == 0.0;
      case CouplingKind::PowerLaw: return a_ == 0.0;
      case CouplingKind::Tabulated:
        return std::all_of(table_.begin(), table_.end(), [](const auto& s) { return s.second == 0.0; });
    }
    return false;
  }

  /// Largest frequency with possibly non-zero coupling; infinite when unbounded.
  double support_end() const {
    double end = cutoff_.value_or(INFINITY);
    if (kind_ == CouplingKind::Tabulated) end = std::min(end, table_.back().first);
    return end;
  }

  /// Finite upper integration limit, or CutoffRequired.
  double upper_limit(const std::string& what) const {
    const double end = support_end();
    if (!std::isfinite(end) && !is_zero()) {
      fail(ErrorKind::CutoffRequired, what + " needs a finite ultraviolet cutoff");
    }
    return std::isfinite(end) ? end : cutoff_.value_or(1.0);
  }

  /// |f(omega)|^2 with the cutoff applied.
  double spectral_weight(double omega) const {
    if (!(omega > 0.0) || omega > support_end()) return 0.0;
    switch (kind_) {
      case CouplingKind::PaperOhmic: return a_ / (4.0 * pi * pi * b_ * omega * omega * omega);
      case CouplingKind::PowerLaw: return a_ == 0.0 ? 0.0 : a_ * std::pow(omega, b_);
      case CouplingKind::Tabulated: {
        if (omega < table_.front().first) return 0.0;
        auto hi = std::upper_bound(table_.begin(), table_.end(), omega,
                                   [](double w, const auto& s) { return w < s.first; });
        if (hi == table_.end()) return table_.back().second;
        auto lo = hi - 1;
        const double x = (omega - lo->first) / (hi->first - lo->first);
        return lo->second + x * (hi->second - lo->second);
      }
    }
    return 0.0;
  }

  /// Points where |f|^2 has kinks (tabulated nodes inside the support); quadrature splits there.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    if (kind_ != CouplingKind::Tabulated) return out;
    for (const auto& s : table_)
      if (s.first < support_end()) out.push_back(s.first);
    return out;
  }

  /// True when |f|^2 omega^q is integrable at omega -> 0.
  bool integrable_at_zero(double q) const {
    switch (kind_) {
      case CouplingKind::PaperOhmic: return a_ == 0.0 || q - 3.0 > -1.0;
      case CouplingKind::PowerLaw: return a_ == 0.0 || b_ + q > -1.0;
      case CouplingKind::Tabulated: return true;
    }
    return true;
  }

 private:
  CouplingSpec(CouplingKind kind, std::optional<double> cutoff) : kind_(kind), cutoff_(cutoff) {
    if (cutoff_) {
      require(*cutoff_ > 0.0 && std::isfinite(*cutoff_), ErrorKind::InvalidArgument, "cutoff must be > 0");
    }
  }

  CouplingKind kind_;
  std::optional<double> cutoff_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

inline cd eval_coupling(const CouplingSpec& spec, double omega) {
  require(omega > 0.0, ErrorKind::InvalidArgument, "eval_coupling needs omega > 0");
  return {std::sqrt(spec.spectral_weight(omega)), 0.0};
}

struct FockQuantum {
  int field = 1;       // bath field index nu, couples to string mode nu
  double omega = 0.0;  // quantum frequency |p|
};

enum class ReservoirKind { Vacuum, FockQuanta, Thermal };

struct ReservoirSpec {
  ReservoirKind kind = ReservoirKind::Vacuum;
  std::vector<FockQuantum> quanta;
  double kT = 0.0;

  static ReservoirSpec vacuum() { return {}; }

  static ReservoirSpec fock(std::vector<FockQuantum> quanta) {
    require(!quanta.empty(), ErrorKind::InvalidArgument, "Fock reservoir needs at least one quantum");
    for (const auto& q : quanta) {
      require(q.field >= 1, ErrorKind::InvalidArgument, "Fock quantum field index must be >= 1");
      require(q.omega > 0.0, ErrorKind::InvalidArgument, "Fock quantum frequency must be > 0");
    }
    return {ReservoirKind::FockQuanta, std::move(quanta), 0.0};
  }

  static ReservoirSpec thermal(double kT) {
    require(kT > 0.0 && std::isfinite(kT), ErrorKind::InvalidArgument, "thermal kT must be > 0");
    return {ReservoirKind::Thermal, {}, kT};
  }
};

struct ModeOccupation {
  int mode = 1;
  int count = 1;

  friend bool operator==(const ModeOccupation&, const ModeOccupation&) = default;
};

/// Product Fock state of the string; occupations sorted by mode, counts >= 1.
class StringFockState {
 public:
  StringFockState() = default;

  explicit StringFockState(std::vector<ModeOccupation> occupation) : occ_(std::move(occupation)) {
    std::sort(occ_.begin(), occ_.end(), [](const auto& a, const auto& b) { return a.mode < b.mode; });
    for (std::size_t i = 0; i < occ_.size(); ++i) {
      require(occ_[i].mode >= 1, ErrorKind::InvalidArgument, "mode index must be >= 1");
      require(occ_[i].count >= 1, ErrorKind::InvalidArgument, "phonon count must be >= 1");
      if (i > 0) require(occ_[i].mode != occ_[i - 1].mode, ErrorKind::InvalidArgument, "duplicate mode index");
    }
  }

  static StringFockState vacuum() { return {}; }
  static StringFockState single(int mode, int count = 1) { return StringFockState({{mode, count}}); }

  const std::vector<ModeOccupation>& occupation() const { return occ_; }
  bool is_vacuum() const { return occ_.empty(); }

  int count(int mode) const {
    for (const auto& o : occ_)
      if (o.mode == mode) return o.count;
    return 0;
  }

  void check_modes(int n_max) const {
    for (const auto& o : occ_) {
      require(o.mode <= n_max, ErrorKind::InvalidArgument,
              "mode " + std::to_string(o.mode) + " exceeds n_max " + std::to_string(n_max));
    }
  }

  /// State with `delta` phonons added to `mode` (delta may be negative).
  StringFockState shifted(int mode, int delta) const {
    std::vector<ModeOccupation> out;
    bool seen = false;
    for (auto o : occ_) {
      if (o.mode == mode) {
        o.count += delta;
        seen = true;
      }
      if (o.count > 0) out.push_back(o);
    }
    if (!seen && delta > 0) out.push_back({mode, delta});
    return StringFockState(std::move(out));
  }

  std::string label() const {
    if (occ_.empty()) return "|0>";
    std::string s = "|";
    for (std::size_t i = 0; i < occ_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(occ_[i].mode) + "^" + std::to_string(occ_[i].count);
    }
    return s + ">";
  }

  friend bool operator==(const StringFockState&, const StringFockState&) = default;

 private:
  std::vector<ModeOccupation> occ_;
};

/// Uniform time grid t_i = i * dt, i = 0 .. count-1.
struct TimeGrid {
  double dt = 0.0;
  std::size_t count = 0;

  void validate() const {
    require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "time step must be > 0");
    require(count >= 1, ErrorKind::InvalidArgument, "time grid must contain at least one point");
  }
  double time(std::size_t i) const { return static_cast<double>(i) * dt; }
  double end() const { return time(count - 1); }

  /// Index of the grid point equal to t; InvalidArgument if t is off the grid.
  std::size_t index_of(double t) const {
    const double x = t / dt;
    const double r = std::round(x);
    require(t >= 0.0 && r < static_cast<double>(count) && std::abs(x - r) < 1e-9 * std::max(1.0, x),
            ErrorKind::InvalidArgument, "time " + std::to_string(t) + " is not a grid point");
    return static_cast<std::size_t>(r);
  }
};

}  // namespace dstring
