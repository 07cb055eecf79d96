#pragma once

// Brute-force oracle: one string mode coupled to N discrete bath oscillators.
//
// Operators X = (A, B, b_1..b_N, b_1^+..b_N^+) obey X' = K X with constant K:
//   A'   = (B - R) / lambda,           R = sum_j g_j (b_j + b_j^+)
//   B'   = -lambda w^2 A
//   b_j' = -i w_j b_j + i g_j (L/2) A'
// which is generated by H = (L/4 lambda)(B - R)^2 + (L lambda w^2/4) A^2 + sum_j w_j b_j^+ b_j.
//
// Two kinds of vectors are integrated with classical RK4:
//   column c' = K c: the coefficients of a(0) in every operator (energies, phonon number);
//   row    r' = K^T r: the expansion of A(t) or B(t) over all initial operators (exact CCR).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dstring/error.hpp"
#include "dstring/model.hpp"

namespace dstring {

struct DiscreteBath {
  std::vector<double> omega;  // midpoints on (0, cutoff]
  std::vector<double> width;  // cell widths
  std::vector<double> g;      // g_j^2 = 4 pi w_j^2 |f(w_j)|^2 dw_j
  double cutoff = 0.0;

  std::size_t n_modes() const { return omega.size(); }

  /// sum_j g_j^2 w_j^p, the discrete version of int 4 pi w^(2+p) |f|^2 dw.
  double moment(double p) const {
    double s = 0.0;
    for (std::size_t j = 0; j < omega.size(); ++j) s += g[j] * g[j] * std::pow(omega[j], p);
    return s;
  }
};

enum class GridKind { Uniform, ResonanceRefined };

/// ResonanceRefined puts `refined_fraction` of the modes uniformly inside the
/// windows center +- half_width and spreads the rest uniformly over the remainder.
struct GridPolicy {
  GridKind kind = GridKind::Uniform;
  std::vector<double> centers;
  double half_width = 0.0;
  double refined_fraction = 0.5;
};

namespace detail {

inline void append_cells(DiscreteBath& bath, const CouplingSpec& spec, double a, double b, std::size_t n) {
  if (n == 0 || !(b > a)) return;
  const double h = (b - a) / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = a + (static_cast<double>(j) + 0.5) * h;
    bath.omega.push_back(w);
    bath.width.push_back(h);
    bath.g.push_back(std::sqrt(4.0 * pi * w * w * spec.spectral_weight(w) * h));
  }
}

}  // namespace detail

inline DiscreteBath discretize_bath(const CouplingSpec& spec, std::size_t n_modes, const GridPolicy& policy = {}) {
  require(n_modes >= 2, ErrorKind::InvalidArgument, "bath needs at least 2 modes");
  const double cutoff = spec.cutoff().value_or(spec.support_end());
  if (!std::isfinite(cutoff)) fail(ErrorKind::CutoffRequired, "discretize_bath needs a finite cutoff");
  DiscreteBath bath;
  bath.cutoff = cutoff;
  if (policy.kind == GridKind::Uniform || policy.centers.empty() || policy.half_width <= 0.0) {
    detail::append_cells(bath, spec, 0.0, cutoff, n_modes);
    return bath;
  }
  require(policy.refined_fraction > 0.0 && policy.refined_fraction < 1.0, ErrorKind::InvalidArgument,
          "refined_fraction must lie in (0, 1)");
  // Merge the refinement windows into disjoint intervals inside (0, cutoff).
  std::vector<std::pair<double, double>> zones;
  auto centers = policy.centers;
  std::sort(centers.begin(), centers.end());
  for (double c : centers) {
    const double lo = std::max(0.0, c - policy.half_width);
    const double hi = std::min(cutoff, c + policy.half_width);
    if (!(hi > lo)) continue;
    if (!zones.empty() && lo <= zones.back().second) {
      zones.back().second = std::max(zones.back().second, hi);
    } else {
      zones.emplace_back(lo, hi);
    }
  }
  std::vector<std::pair<double, double>> gaps;
  double cursor = 0.0;
  for (const auto& z : zones) {
    if (z.first > cursor) gaps.emplace_back(cursor, z.first);
    cursor = z.second;
  }
  if (cutoff > cursor) gaps.emplace_back(cursor, cutoff);

  const auto total = [](const auto& v) {
    double s = 0.0;
    for (const auto& p : v) s += p.second - p.first;
    return s;
  };
  const auto fine_total = static_cast<std::size_t>(std::lround(policy.refined_fraction * static_cast<double>(n_modes)));
  const std::size_t coarse_total = n_modes - fine_total;
  const double zone_len = total(zones);
  const double gap_len = total(gaps);
  // Interleave zones and gaps in frequency order so omega stays increasing.
  std::vector<std::tuple<double, double, std::size_t>> cells;
  for (const auto& z : zones) {
    const auto n = static_cast<std::size_t>(std::max<long>(1, std::lround(fine_total * (z.second - z.first) / zone_len)));
    cells.emplace_back(z.first, z.second, n);
  }
  for (const auto& gp : gaps) {
    const auto n = static_cast<std::size_t>(
        std::max<long>(1, std::lround(static_cast<double>(coarse_total) * (gp.second - gp.first) / gap_len)));
    cells.emplace_back(gp.first, gp.second, n);
  }
  std::sort(cells.begin(), cells.end());
  for (const auto& [a, b, n] : cells) detail::append_cells(bath, spec, a, b, n);
  return bath;
}

/// Poincare recurrence estimate 2 pi / dw, using the widest cell (the earliest revival).
inline double recurrence_time(const DiscreteBath& bath) {
  require(!bath.width.empty(), ErrorKind::InvalidArgument, "empty bath");
  return 2.0 * pi / *std::max_element(bath.width.begin(), bath.width.end());
}

struct OracleRun {
  StringParams params;
  int mode = 1;
  double omega_n = 0.0;
  double step = 0.0;
  double recurrence = 0.0;
  TimeGrid t_grid;

  // Coefficients of a(0) and a^+(0) in the ladder operator a(t).
  std::vector<cd> alpha, alpha_dag;
  // Coefficients of a(0) in A(t) and B(t).
  std::vector<cd> c_A, c_B;
  // Normal-ordered energies per phonon initially in the mode.
  std::vector<double> string_energy, interaction_energy, reservoir_energy;
  // |[A(t), B(t)] - 2i/L| from the propagated rows.
  std::vector<double> ccr_defect;

  // Final column (A, B, b_1..b_N, b_1^+..b_N^+) coefficients of a(0).
  Eigen::VectorXcd final_column;

  double phonon_number(std::size_t i) const { return std::norm(alpha[i]) + std::norm(alpha_dag[i]); }
};

inline OracleRun evolve_coefficients(const StringParams& params, const DiscreteBath& bath, int n,
                                     const TimeGrid& t_grid, double step) {
  params.validate();
  t_grid.validate();
  require(n >= 1, ErrorKind::InvalidArgument, "mode index must be >= 1");
  require(step > 0.0, ErrorKind::InvalidArgument, "integrator step must be > 0");
  const std::size_t nb = bath.n_modes();
  require(nb >= 1, ErrorKind::InvalidArgument, "empty bath");
  const double wn = mode_frequency(params, n);
  const double fastest = std::max(wn, *std::max_element(bath.omega.begin(), bath.omega.end()));
  if (fastest * step >= 0.5) {
    fail(ErrorKind::StepTooLarge, "fastest frequency times step is " + std::to_string(fastest * step) + " >= 0.5");
  }
  const double ratio = t_grid.dt / step;
  const auto sub = static_cast<std::size_t>(std::llround(ratio));
  require(sub >= 1 && std::abs(ratio - static_cast<double>(sub)) < 1e-9 * ratio, ErrorKind::InvalidArgument,
          "output spacing must be a whole number of integrator steps");

  const double lam = params.lambda;
  const double L = params.length;
  const double c = L / (2.0 * lam);
  const cd I(0.0, 1.0);
  Eigen::ArrayXd w(nb), g(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    w[j] = bath.omega[j];
    g[j] = bath.g[j];
  }
  const auto m = static_cast<Eigen::Index>(nb);

  // Layout: [0] A, [1] B, [2, 2+N) b, [2+N, 2+2N) b^+.
  using Vec = Eigen::ArrayXcd;
  const auto column_rhs = [&](const Vec& s, Vec& d) {
    const cd cr = (g * (s.segment(2, m) + s.segment(2 + m, m))).sum();
    const cd adot = (s[1] - cr) / lam;
    d[0] = adot;
    d[1] = -lam * wn * wn * s[0];
    d.segment(2, m) = -I * w * s.segment(2, m) + I * g * (0.5 * L) * adot;
    d.segment(2 + m, m) = I * w * s.segment(2 + m, m) - I * g * (0.5 * L) * adot;
  };
  const auto row_rhs = [&](const Vec& r, Vec& d) {
    const cd S = (g * (r.segment(2, m) - r.segment(2 + m, m))).sum();
    d[0] = -lam * wn * wn * r[1];
    d[1] = r[0] / lam + I * c * S;
    d.segment(2, m) = -g * r[0] / lam - I * w * r.segment(2, m) - I * c * g * S;
    d.segment(2 + m, m) = -g * r[0] / lam + I * w * r.segment(2 + m, m) - I * c * g * S;
  };
  const auto rk4 = [&](auto&& rhs, Vec& s, Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp) {
    rhs(s, k1);
    tmp = s + (0.5 * step) * k1;
    rhs(tmp, k2);
    tmp = s + (0.5 * step) * k2;
    rhs(tmp, k3);
    tmp = s + step * k3;
    rhs(tmp, k4);
    s += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  const double kappa = 1.0 / std::sqrt(L * lam * wn);
  const std::size_t dim = 2 + 2 * nb;
  Vec col = Vec::Zero(dim), rowA = Vec::Zero(dim), rowB = Vec::Zero(dim);
  col[0] = kappa;
  col[1] = cd(0.0, -lam * wn * kappa);
  rowA[0] = 1.0;
  rowB[1] = 1.0;
  Vec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  OracleRun run;
  run.params = params;
  run.mode = n;
  run.omega_n = wn;
  run.step = step;
  run.recurrence = recurrence_time(bath);
  run.t_grid = t_grid;
  const std::size_t nt = t_grid.count;
  run.alpha.resize(nt);
  run.alpha_dag.resize(nt);
  run.c_A.resize(nt);
  run.c_B.resize(nt);
  run.string_energy.resize(nt);
  run.interaction_energy.resize(nt);
  run.reservoir_energy.resize(nt);
  run.ccr_defect.resize(nt);

  const double ka = std::sqrt(L * lam * wn);
  const double kb = std::sqrt(L / (lam * wn));
  const auto record = [&](std::size_t i) {
    const cd cA = col[0], cB = col[1];
    run.c_A[i] = cA;
    run.c_B[i] = cB;
    run.alpha[i] = 0.5 * (ka * cA + I * kb * cB);
    run.alpha_dag[i] = 0.5 * (ka * std::conj(cA) + I * kb * std::conj(cB));
    const cd cR = (g * (col.segment(2, m) + col.segment(2 + m, m))).sum();
    run.string_energy[i] = L / (4.0 * lam) * 2.0 * std::norm(cB) + L * lam * wn * wn / 4.0 * 2.0 * std::norm(cA);
    run.interaction_energy[i] = L / (4.0 * lam) * (-4.0 * (cB * std::conj(cR)).real() + 2.0 * std::norm(cR));
    run.reservoir_energy[i] = (w * (col.segment(2, m).abs2() + col.segment(2 + m, m).abs2())).sum();
    const cd bath_part = (rowA.segment(2, m) * rowB.segment(2 + m, m) - rowA.segment(2 + m, m) * rowB.segment(2, m)).sum();
    const cd comm = (rowA[0] * rowB[1] - rowA[1] * rowB[0]) * cd(0.0, 2.0 / L) + bath_part;
    run.ccr_defect[i] = std::abs(comm - cd(0.0, 2.0 / L));
  };

  record(0);
  for (std::size_t i = 1; i < nt; ++i) {
    for (std::size_t s = 0; s < sub; ++s) {
      rk4(column_rhs, col, k1, k2, k3, k4, tmp);
      rk4(row_rhs, rowA, k1, k2, k3, k4, tmp);
      rk4(row_rhs, rowB, k1, k2, k3, k4, tmp);
    }
    record(i);
  }
  run.final_column = col.matrix();
  return run;
}

struct FitWindow {
  double start = 0.0;
  double end = 0.0;
};

/// Initial-slip time 0.1 lambda / beta excluded from fits (0 for an undamped string).
inline double slip_time(const StringParams& p) { return p.beta > 0.0 ? 0.1 * p.lambda / p.beta : 0.0; }

/// Exponential rate of the phonon number: alpha(t) is demodulated at the
/// damped frequency, averaged over one period, and log|.|^2 is fitted by least squares.
inline double fit_decay_rate(const OracleRun& run, const FitWindow& window) {
  const double t_end = run.t_grid.end();
  if (!(window.start >= 0.0 && window.end > window.start && window.end <= t_end * (1.0 + 1e-12))) {
    fail(ErrorKind::WindowOutsideRun, "fit window lies outside the run");
  }
  if (window.start < slip_time(run.params) * (1.0 - 1e-12)) {
    fail(ErrorKind::WindowOutsideRun, "fit window starts inside the initial slip");
  }
  if (window.end > run.recurrence) {
    fail(ErrorKind::RecurrenceContamination, "fit window ends after the recurrence time " +
                                                 std::to_string(run.recurrence));
  }
  const double eta = run.params.beta / (2.0 * run.params.lambda);
  const double wd = std::sqrt(std::max(0.0, run.omega_n * run.omega_n - eta * eta / 4.0));
  const double dt = run.t_grid.dt;
  const auto per = static_cast<std::size_t>(std::max(1L, std::lround(2.0 * pi / (wd * dt))));
  const auto first = static_cast<std::size_t>(std::ceil(window.start / dt - 1e-9));
  const auto last = std::min(run.t_grid.count - 1, static_cast<std::size_t>(std::floor(window.end / dt + 1e-9)));
  require(last + 1 >= first + per + 2, ErrorKind::WindowOutsideRun, "fit window shorter than two periods");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  cd acc = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    acc += run.alpha[i] * std::polar(1.0, wd * run.t_grid.time(i));
    if (i >= first + per) acc -= run.alpha[i - per] * std::polar(1.0, wd * run.t_grid.time(i - per));
    if (i + 1 < first + per) continue;
    const double x = run.t_grid.time(i) - 0.5 * static_cast<double>(per - 1) * dt;
    const double y = std::log(std::norm(acc / static_cast<double>(per)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double nc = static_cast<double>(count);
  const double slope = (nc * sxy - sx * sy) / (nc * sxx - sx * sx);
  return -slope;
}

}  // namespace dstring
