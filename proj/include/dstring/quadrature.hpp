#pragma once

// Quadrature building blocks: adaptive Gauss-Kronrod on finite intervals
// (Boost.Math) with a tanh-sinh retry for endpoint singularities, oscillation-bounded panel splitting, and fixed frequency
// grids (composite Gauss-Legendre panels) used by the coefficient solutions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "dstring/error.hpp"
#include "dstring/model.hpp"

namespace dstring {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;  // integral of |f|, the scale for relative tolerances

  bool converged(double rel_tol) const {
    return error <= rel_tol * std::max(l1, std::numeric_limits<double>::min());
  }
};

template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-11, unsigned max_depth = 15) {
  QuadResult r;
  if (a == b) return r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol, &r.error,
                                                                           &r.l1);
  return r;
}

/// Splits [a, b] into equal panels no wider than max_width and integrates each
/// adaptively. max_width <= 0 means a single panel.
template <class F>
QuadResult integrate_panels(F&& f, double a, double b, double max_width, double rel_tol = 1e-11) {
  QuadResult total;
  if (a == b) return total;
  std::size_t panels = 1;
  if (max_width > 0.0) panels = static_cast<std::size_t>(std::ceil((b - a) / max_width));
  panels = std::max<std::size_t>(panels, 1);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t i = 0; i < panels; ++i) {
    const double lo = a + h * static_cast<double>(i);
    const double hi = (i + 1 == panels) ? b : a + h * static_cast<double>(i + 1);
    QuadResult part = integrate(f, lo, hi, rel_tol);
    if (!part.converged(100.0 * rel_tol)) {
      // Square-root type behaviour at a panel end defeats Gauss-Kronrod; tanh-sinh clusters nodes there.
      thread_local boost::math::quadrature::tanh_sinh<double> ts;
      QuadResult alt;
      alt.value = ts.integrate(f, lo, hi, rel_tol, &alt.error, &alt.l1);
      if (alt.error < part.error) part = alt;
    }
    total.value += part.value;
    total.error += part.error;
    total.l1 += part.l1;
  }
  return total;
}

/// Panel width that keeps at most one eighth of an oscillation period of
/// cos(omega t) inside a panel.
inline double oscillation_panel_width(double t) { return t == 0.0 ? 0.0 : pi / (4.0 * std::abs(t)); }

struct ComplexQuadResult {
  std::complex<double> value;
  double error = 0.0;
  double l1 = 0.0;

  bool converged(double rel_tol) const {
    return error <= rel_tol * std::max(l1, std::numeric_limits<double>::min());
  }
};

template <class F>
ComplexQuadResult integrate_panels_complex(F&& f, double a, double b, double max_width, double rel_tol = 1e-11) {
  const QuadResult re = integrate_panels([&](double x) { return std::real(f(x)); }, a, b, max_width, rel_tol);
  const QuadResult im = integrate_panels([&](double x) { return std::imag(f(x)); }, a, b, max_width, rel_tol);
  return {{re.value, im.value}, re.error + im.error, re.l1 + im.l1};
}

/// Fixed quadrature rule over frequency: integral g(w) dw ~ sum weights[i] g(nodes[i]).
struct FrequencyGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double lower() const { return nodes.empty() ? 0.0 : nodes.front(); }
  double upper() const { return nodes.empty() ? 0.0 : nodes.back(); }

  template <class G>
  auto integrate(G&& g) const {
    decltype(g(0.0)) sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * g(nodes[i]);
    return sum;
  }

  /// Largest gap between neighbouring nodes inside [lo, hi].
  double max_spacing(double lo, double hi) const {
    double gap = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (nodes[i] >= lo && nodes[i - 1] <= hi) gap = std::max(gap, nodes[i] - nodes[i - 1]);
    }
    return gap;
  }
};

inline constexpr unsigned kPanelOrder = 4;

/// Appends a composite Gauss-Legendre rule of `panels` equal panels on [a, b].
inline void append_gauss_panels(FrequencyGrid& grid, double a, double b, std::size_t panels) {
  using rule = boost::math::quadrature::gauss<double, kPanelOrder>;
  if (!(b > a) || panels == 0) return;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double mid = lo + 0.5 * h;
    const double half = 0.5 * h;
    // abscissa() holds the non-negative half of the symmetric rule.
    for (std::size_t k = x.size(); k-- > 0;) {
      if (x[k] == 0.0) continue;
      grid.nodes.push_back(mid - half * x[k]);
      grid.weights.push_back(half * w[k]);
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      grid.nodes.push_back(mid + half * x[k]);
      grid.weights.push_back(half * w[k]);
    }
  }
}

inline FrequencyGrid gauss_grid(double a, double b, std::size_t panels) {
  FrequencyGrid g;
  append_gauss_panels(g, a, b, panels);
  return g;
}

/// Grid on (0, cutoff] with node spacing ~far_spacing, refined around `center`
/// to `points_per_width` nodes per `width` over center +- zone_widths * width.
struct ResonanceGridSpec {
  double cutoff = 0.0;
  double center = 0.0;
  double width = 0.0;
  double far_spacing = 0.05;
  double points_per_width = 20.0;
  double zone_widths = 40.0;
};

inline FrequencyGrid resonance_grid(const ResonanceGridSpec& s) {
  require(s.cutoff > 0.0, ErrorKind::InvalidArgument, "frequency grid needs cutoff > 0");
  require(s.far_spacing > 0.0, ErrorKind::InvalidArgument, "frequency grid needs far_spacing > 0");
  const auto panels_for = [](double len, double node_spacing) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(len / (node_spacing * kPanelOrder))));
  };
  FrequencyGrid g;
  if (s.width <= 0.0 || s.center <= 0.0 || s.center >= s.cutoff) {
    append_gauss_panels(g, 0.0, s.cutoff, panels_for(s.cutoff, s.far_spacing));
    return g;
  }
  const double fine = std::min(s.far_spacing, s.width / s.points_per_width);
  const double lo = std::max(0.0, s.center - s.zone_widths * s.width);
  const double hi = std::min(s.cutoff, s.center + s.zone_widths * s.width);
  append_gauss_panels(g, 0.0, lo, panels_for(lo, s.far_spacing));
  append_gauss_panels(g, lo, hi, panels_for(hi - lo, fine));
  append_gauss_panels(g, hi, s.cutoff, panels_for(s.cutoff - hi, s.far_spacing));
  return g;
}

/// integral_0^t exp(z s) ds, accurate for small |z t|.
inline std::complex<double> exp_integral(std::complex<double> z, double t) {
  const std::complex<double> zt = z * t;
  if (std::abs(zt) < 1e-3) {
    return t * (1.0 + zt / 2.0 + zt * zt / 6.0 + zt * zt * zt / 24.0);
  }
  return (std::exp(zt) - 1.0) / z;
}

/// sin(x)/x with a series branch near zero.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace dstring
