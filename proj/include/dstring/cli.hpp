#pragma once

// Batch front end: flat key=value configs, deterministic CSV tables, a
// key=value summary file, and the command dispatcher behind the dstring tool.

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "dstring/bathsim.hpp"
#include "dstring/dynamics.hpp"
#include "dstring/error.hpp"
#include "dstring/fieldrep.hpp"
#include "dstring/kernel.hpp"
#include "dstring/model.hpp"
#include "dstring/observables.hpp"
#include "dstring/parallel.hpp"
#include "dstring/transitions.hpp"

namespace dstring {

// ---------------------------------------------------------------- numbers

/// Shortest decimal string that parses back to exactly x.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  double x = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

// ---------------------------------------------------------------- tables

using Cell = std::variant<double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), ErrorKind::InvalidArgument, "row width does not match the header");
    rows.push_back(std::move(row));
  }
};

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::pair<std::string, bool>> split_csv_line(const std::string& line) {
  std::vector<std::pair<std::string, bool>> out;  // (text, was quoted)
  std::string cur;
  bool quoted = false, in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = quoted = true;
    } else if (c == ',') {
      out.emplace_back(std::move(cur), quoted);
      cur.clear();
      quoted = false;
    } else {
      cur += c;
    }
  }
  require(!in_quotes, ErrorKind::Io, "unterminated quote in CSV line");
  out.emplace_back(std::move(cur), quoted);
  return out;
}

}  // namespace detail

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + detail::csv_field(t.columns[i]);
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      // Text cells are always quoted so that they never re-parse as numbers.
      if (const auto* d = std::get_if<double>(&row[i])) {
        out += format_number(*d);
      } else {
        const auto& s = std::get<std::string>(row[i]);
        out += '"';
        for (char c : s) {
          if (c == '"') out += '"';
          out += c;
        }
        out += '"';
      }
    }
    out += '\n';
  }
  return out;
}

inline Table parse_csv(const std::string& text, std::string name = {}) {
  Table t;
  t.name = std::move(name);
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (header) {
      for (const auto& f : fields) t.columns.push_back(f.first);
      header = false;
      continue;
    }
    std::vector<Cell> row;
    for (const auto& [text_field, quoted] : fields) {
      if (quoted) {
        row.emplace_back(text_field);
      } else {
        const auto x = parse_number(text_field);
        require(x.has_value(), ErrorKind::Io, "unparsable CSV number '" + text_field + "'");
        row.emplace_back(*x);
      }
    }
    t.add(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------- summary

/// Ordered key=value lines; insertion order is preserved for stable output.
struct Summary {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, double value) { entries.emplace_back(key, format_number(value)); }
  void set(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }

  /// analytic, oracle and relative error under a common prefix.
  void pair(const std::string& name, double analytic, double oracle) {
    set(name + ".analytic", analytic);
    set(name + ".oracle", oracle);
    set(name + ".rel_err", analytic == 0.0 ? std::abs(oracle) : std::abs(oracle - analytic) / std::abs(analytic));
  }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  std::string text() const {
    std::string out;
    for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
    return out;
  }
};

// ---------------------------------------------------------------- config

enum class Command { Kernel, Evolve, Energies, Rates, Oracle, Shapes };

inline std::optional<Command> parse_command(std::string_view s) {
  if (s == "kernel") return Command::Kernel;
  if (s == "evolve") return Command::Evolve;
  if (s == "energies") return Command::Energies;
  if (s == "rates") return Command::Rates;
  if (s == "oracle") return Command::Oracle;
  if (s == "shapes") return Command::Shapes;
  return std::nullopt;
}

/// Raw key=value pairs. Lines starting with '#' and blank lines are ignored.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      const auto trimmed = trim(line);
      if (trimmed.empty() || trimmed.front() == '#') continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        fail(ErrorKind::ConfigParse, "line " + std::to_string(number) + ": expected key=value");
      }
      const std::string key(trim(trimmed.substr(0, eq)));
      const std::string value(trim(trimmed.substr(eq + 1)));
      if (key.empty()) fail(ErrorKind::ConfigParse, "line " + std::to_string(number) + ": empty key");
      if (!kv.values_.emplace(key, value).second) {
        fail(ErrorKind::ConfigParse, "line " + std::to_string(number) + ": duplicate key " + key);
      }
    }
    return kv;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto x = parse_number(it->second);
    if (!x || !std::isfinite(*x)) fail(ErrorKind::ConfigParse, key + ": not a finite number: '" + it->second + "'");
    return *x;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) {
      used_.insert(key);
      return std::nullopt;
    }
    return number(key, 0.0);
  }

  long integer(const std::string& key, long fallback) {
    const double x = number(key, static_cast<double>(fallback));
    if (x != std::floor(x) || std::abs(x) > 1e12) fail(ErrorKind::ConfigParse, key + ": expected an integer");
    return static_cast<long>(x);
  }

  /// Keys never consulted by the reader; reported as typos.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) out.push_back(k);
    }
    return out;
  }

 private:
  static std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

struct BathConfig {
  std::size_t modes = 2000;
  double step = 0.002;
  double dt = 0.02;
  double end = 72.0;
  double window_start = 5.0;
  double window_end = 70.0;
  GridPolicy grid;
};

struct RunConfig {
  Command command = Command::Rates;
  StringParams params{1.0, 1.0, 1.0, 0.1};
  CouplingSpec coupling = CouplingSpec::paper_ohmic(0.1, 1.0, 50.0 * pi);
  ReservoirSpec reservoir;
  StringFockState state = StringFockState::single(1);
  DampingConvention convention = DampingConvention::KernelConsistent;
  TimeGrid time{0.1, 101};
  int mode = 1;
  DensityOptions density{.n_max = 3};
  BathConfig bath;
  std::vector<double> radii;
  std::string prefix = "dstring";
};

namespace detail {

// "a:b,c:d" -> [(a, b), (c, d)]
inline std::vector<std::pair<double, double>> parse_pairs(const std::string& key, const std::string& value) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    const auto a = colon == std::string::npos ? std::nullopt : parse_number(item.substr(0, colon));
    const auto b = colon == std::string::npos ? std::nullopt : parse_number(item.substr(colon + 1));
    if (!a || !b) fail(ErrorKind::ConfigParse, key + ": expected comma-separated a:b pairs, got '" + item + "'");
    out.emplace_back(*a, *b);
  }
  if (out.empty()) fail(ErrorKind::ConfigParse, key + ": empty list");
  return out;
}

inline int as_index(const std::string& key, double x) {
  if (x != std::floor(x) || x < 1.0 || x > 1e6) fail(ErrorKind::ConfigParse, key + ": expected a positive integer");
  return static_cast<int>(x);
}

}  // namespace detail

/// Reads a config; every unknown key, malformed value or out-of-range field is a
/// ConfigParse error naming the key.
inline RunConfig parse_config(const std::string& text, Command command) {
  auto kv = KeyValues::parse(text);
  RunConfig c;
  c.command = command;

  c.params.lambda = kv.number("string.lambda", 1.0);
  c.params.mu = kv.number("string.mu", 1.0);
  c.params.length = kv.number("string.length", 1.0);
  c.params.beta = kv.number("string.beta", 0.1);
  try {
    c.params.validate();
  } catch (const Error& e) {
    fail(ErrorKind::ConfigParse, e.what());
  }
  const double w1 = mode_frequency(c.params, 1);

  const auto kind = kv.text("coupling.kind", "ohmic");
  std::optional<double> cutoff = kv.optional_number("coupling.cutoff");
  if (const auto factor = kv.optional_number("coupling.cutoff_omega1")) {
    if (cutoff) fail(ErrorKind::ConfigParse, "coupling.cutoff and coupling.cutoff_omega1 are exclusive");
    cutoff = *factor * w1;
  }
  if (!cutoff && !kv.has("coupling.cutoff") && kind != "tabulated") cutoff = 50.0 * w1;
  if (cutoff && !(*cutoff > 0.0)) fail(ErrorKind::ConfigParse, "coupling.cutoff must be > 0");
  try {
    if (kind == "ohmic") {
      const double beta = kv.number("coupling.beta", c.params.beta);
      if (beta < 0.0) fail(ErrorKind::ConfigParse, "coupling.beta must be >= 0");
      c.coupling = CouplingSpec::paper_ohmic(beta, c.params.length, cutoff);
    } else if (kind == "power_law") {
      c.coupling = CouplingSpec::power_law(kv.number("coupling.prefactor", 0.0), kv.number("coupling.exponent", 0.0),
                                           cutoff);
    } else if (kind == "tabulated") {
      c.coupling = CouplingSpec::tabulated(detail::parse_pairs("coupling.table", kv.text("coupling.table", "")), cutoff);
    } else if (kind == "none") {
      c.coupling = CouplingSpec::none(cutoff);
    } else {
      fail(ErrorKind::ConfigParse, "coupling.kind: unknown value '" + kind + "'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigParse) throw;
    fail(ErrorKind::ConfigParse, std::string("coupling: ") + e.what());
  }

  const auto res = kv.text("reservoir.kind", "vacuum");
  if (res == "vacuum") {
    c.reservoir = ReservoirSpec::vacuum();
  } else if (res == "thermal") {
    const double kT = kv.number("reservoir.kT", 0.0);
    if (!(kT > 0.0)) fail(ErrorKind::ConfigParse, "reservoir.kT must be > 0");
    c.reservoir = ReservoirSpec::thermal(kT);
  } else if (res == "fock") {
    std::vector<FockQuantum> quanta;
    for (const auto& [field, w] : detail::parse_pairs("reservoir.quanta", kv.text("reservoir.quanta", ""))) {
      if (!(w > 0.0)) fail(ErrorKind::ConfigParse, "reservoir.quanta: frequencies must be > 0");
      quanta.push_back({detail::as_index("reservoir.quanta", field), w});
    }
    c.reservoir = ReservoirSpec::fock(std::move(quanta));
  } else {
    fail(ErrorKind::ConfigParse, "reservoir.kind: unknown value '" + res + "'");
  }

  std::vector<ModeOccupation> occ;
  for (const auto& [m, r] : detail::parse_pairs("state.phonons", kv.text("state.phonons", "1:1"))) {
    occ.push_back({detail::as_index("state.phonons", m), detail::as_index("state.phonons", r)});
  }
  try {
    c.state = StringFockState(std::move(occ));
  } catch (const Error& e) {
    fail(ErrorKind::ConfigParse, std::string("state.phonons: ") + e.what());
  }

  const auto conv = kv.text("damping.convention", "kernel_consistent");
  if (conv == "kernel_consistent") {
    c.convention = DampingConvention::KernelConsistent;
  } else if (conv == "full_weight") {
    c.convention = DampingConvention::FullWeight;
  } else {
    fail(ErrorKind::ConfigParse, "damping.convention: unknown value '" + conv + "'");
  }

  c.time.dt = kv.number("time.dt", 0.1);
  if (!(c.time.dt > 0.0)) fail(ErrorKind::ConfigParse, "time.dt must be > 0");
  const double t_end = kv.number("time.end", 10.0);
  if (!(t_end >= 0.0)) fail(ErrorKind::ConfigParse, "time.end must be >= 0");
  c.time.count = static_cast<std::size_t>(std::llround(t_end / c.time.dt)) + 1;
  if (c.time.count > 10'000'000) fail(ErrorKind::ConfigParse, "time.end / time.dt is too large");
  c.mode = detail::as_index("evolve.mode", kv.number("evolve.mode", 1.0));

  c.density.n_max = static_cast<int>(kv.integer("rates.n_max", 3));
  if (c.density.n_max < 1) fail(ErrorKind::ConfigParse, "rates.n_max must be >= 1");
  c.density.broadening_factor = kv.number("rates.broadening", kDefaultBroadening);
  if (!(c.density.broadening_factor > 0.0)) fail(ErrorKind::ConfigParse, "rates.broadening must be > 0");
  const auto rule = kv.text("rates.thermal_rule", "boltzmann");
  if (rule == "boltzmann") {
    c.density.rule = ThermalRule::Boltzmann;
  } else if (rule == "bose_einstein") {
    c.density.rule = ThermalRule::BoseEinstein;
  } else {
    fail(ErrorKind::ConfigParse, "rates.thermal_rule: unknown value '" + rule + "'");
  }

  const long modes = kv.integer("bath.modes", 2000);
  if (modes < 2) fail(ErrorKind::ConfigParse, "bath.modes must be >= 2");
  c.bath.modes = static_cast<std::size_t>(modes);
  c.bath.step = kv.number("bath.step", 0.002);
  c.bath.dt = kv.number("bath.dt", 0.02);
  c.bath.end = kv.number("bath.end", 72.0);
  c.bath.window_start = kv.number("bath.window_start", 5.0);
  c.bath.window_end = kv.number("bath.window_end", 70.0);
  if (!(c.bath.step > 0.0)) fail(ErrorKind::ConfigParse, "bath.step must be > 0");
  if (!(c.bath.dt > 0.0)) fail(ErrorKind::ConfigParse, "bath.dt must be > 0");
  if (!(c.bath.end > 0.0)) fail(ErrorKind::ConfigParse, "bath.end must be > 0");
  const auto grid = kv.text("bath.grid", "uniform");
  if (grid == "uniform") {
    c.bath.grid.kind = GridKind::Uniform;
  } else if (grid == "refined") {
    c.bath.grid.kind = GridKind::ResonanceRefined;
    c.bath.grid.centers = {mode_frequency(c.params, c.mode)};
    c.bath.grid.half_width = kv.number("bath.refine_half_width", 0.5);
    c.bath.grid.refined_fraction = kv.number("bath.refine_fraction", 0.5);
  } else {
    fail(ErrorKind::ConfigParse, "bath.grid: unknown value '" + grid + "'");
  }

  const double r_min = kv.number("shapes.r_min", 0.0);
  const double r_max = kv.number("shapes.r_max", 5.0);
  const long r_count = kv.integer("shapes.r_count", 51);
  if (!(r_min >= 0.0 && r_max >= r_min) || r_count < 1) {
    fail(ErrorKind::ConfigParse, "shapes.r_min/r_max/r_count describe an invalid grid");
  }
  for (long i = 0; i < r_count; ++i) {
    c.radii.push_back(r_count == 1 ? r_min : r_min + (r_max - r_min) * static_cast<double>(i) / (r_count - 1));
  }

  c.prefix = kv.text("output.prefix", "dstring");

  const auto unknown = kv.unused();
  if (!unknown.empty()) fail(ErrorKind::ConfigParse, "unknown key " + unknown.front());
  return c;
}

// ---------------------------------------------------------------- commands

struct RunOutput {
  std::vector<Table> tables;
  Summary summary;
};

namespace detail {

inline RunOutput run_kernel(const RunConfig& c) {
  RunOutput out;
  const auto sample = gamma_kernel(c.coupling, c.time, c.params.length);
  Table t{"kernel", {"t", "gamma"}, {}};
  for (std::size_t i = 0; i < c.time.count; ++i) t.add({c.time.time(i), sample.gamma[i]});
  out.tables.push_back(std::move(t));
  auto& s = out.summary;
  s.set("command", "kernel");
  s.set("cutoff", sample.cutoff_used);
  s.set("gamma_integral", gamma_integral(sample, c.time.end()));
  if (c.coupling.kind() == CouplingKind::PaperOhmic && c.coupling.ohmic_length() == c.params.length) {
    const double beta = c.coupling.ohmic_beta();
    s.pair("gamma_integral_vs_half_beta", beta / 2.0, gamma_integral(sample, c.time.end()));
    // Measured against gamma(0) = beta cutoff / pi, since the kernel has zeros.
    const double scale = beta * sample.cutoff_used / pi;
    double worst = 0.0;
    for (std::size_t i = 0; i < c.time.count; ++i) {
      const double closed = ohmic_gamma_closed_form(beta, sample.cutoff_used, c.time.time(i));
      worst = std::max(worst, std::abs(sample.gamma[i] - closed) / scale);
    }
    s.set("closed_form_max_scaled_err", worst);
  }
  return out;
}

inline RunOutput run_evolve(const RunConfig& c) {
  RunOutput out;
  const auto grid = mode_frequency_grid(c.params, c.coupling, c.mode, c.convention);
  const auto sol = mode_solution(c.params, c.coupling, c.mode, c.time, grid, c.convention);
  Table t{"evolve", {"t", "re_c_a", "im_c_a", "re_p_a", "im_p_a", "ccr_defect"}, {}};
  double worst = 0.0;
  for (std::size_t i = 0; i < c.time.count; ++i) {
    const double d = ccr_defect(sol, c.time.time(i));
    worst = std::max(worst, d);
    t.add({c.time.time(i), sol.c_a[i].real(), sol.c_a[i].imag(), sol.p_a[i].real(), sol.p_a[i].imag(), d});
  }
  out.tables.push_back(std::move(t));
  auto& s = out.summary;
  s.set("command", "evolve");
  s.set("mode", static_cast<double>(c.mode));
  s.set("omega_n", sol.omega_n);
  s.set("damping_rate", sol.rate);
  s.set("omega_grid_points", static_cast<double>(grid.size()));
  s.set("ccr_defect_max", worst);
  return out;
}

inline RunOutput run_energies(const RunConfig& c) {
  RunOutput out;
  std::vector<CoefficientSolution> sols;
  for (const auto& o : c.state.occupation()) {
    const auto grid = mode_frequency_grid(c.params, c.coupling, o.mode, c.convention);
    sols.push_back(mode_solution(c.params, c.coupling, o.mode, c.time, grid, c.convention));
  }
  Table t{"energies", {"t", "string_energy"}, {}};
  auto& s = out.summary;
  s.set("command", "energies");
  s.set("state", c.state.label());
  if (!sols.empty()) {
    const auto report = string_energy_timeseries(sols, c.state);
    for (std::size_t i = 0; i < c.time.count; ++i) t.add({c.time.time(i), report.string_energy[i]});
    s.set("string_energy_final", report.string_energy.back());
  }
  out.tables.push_back(std::move(t));
  s.set("asymptote_string", string_energy_asymptotic(c.params, c.state));
  if (c.params.beta > 0.0) {
    s.pair("asymptote_reservoir", reservoir_energy_asymptotic(c.params, c.state, EnergyMethod::ClosedForm),
           reservoir_energy_asymptotic(c.params, c.state, EnergyMethod::Quadrature));
  }
  return out;
}

inline RunOutput run_rates(const RunConfig& c) {
  RunOutput out;
  Table t{"rates", {"channel", "rate", "analytic", "rel_err"}, {}};
  auto& s = out.summary;
  s.set("command", "rates");
  const auto row = [&](const RateReport& r) { t.add({r.channel, r.rate, r.analytic, r.rel_err()}); };
  bool first = true;
  for (const auto& o : c.state.occupation()) {
    const auto e = emission_rate(c.params, c.coupling, o.mode);
    row(e);
    if (first) s.set("emission_rate", e.rate);
    first = false;
    s.set("emission_rate.mode" + std::to_string(o.mode), e.rate);
  }
  if (c.reservoir.kind == ReservoirKind::Thermal) {
    for (int nu = 1; nu <= c.density.n_max; ++nu) {
      if (mode_frequency(c.params, nu) > c.coupling.support_end()) break;
      const auto r = absorption_rate_thermal(c.params, c.coupling, c.reservoir.kT, nu, c.density.rule);
      row(r);
      s.set("thermal_ratio.mode" + std::to_string(nu), r.rate / emission_rate(c.params, c.coupling, nu).rate);
    }
  } else if (c.reservoir.kind == ReservoirKind::FockQuanta) {
    std::set<int> fields;
    for (const auto& q : c.reservoir.quanta) fields.insert(q.field);
    for (int nu : fields) row(absorption_rate_fock(c.params, c.coupling, c.reservoir, nu, c.density.broadening_factor));
  }
  out.tables.push_back(std::move(t));

  Table d{"density", {"state", "weight", "string_change", "bath_change", "channel"}, {}};
  for (const auto& e : reduced_density_diagonal(c.params, c.coupling, c.state, c.reservoir, c.time.end(), c.density)) {
    d.add({e.state.label(), e.weight, static_cast<double>(e.string_change), static_cast<double>(e.bath_change),
           e.channel});
  }
  out.tables.push_back(std::move(d));
  s.set("density_time", c.time.end());
  return out;
}

inline RunOutput run_oracle(const RunConfig& c) {
  RunOutput out;
  const auto bath = discretize_bath(c.coupling, c.bath.modes, c.bath.grid);
  const TimeGrid tg{c.bath.dt, static_cast<std::size_t>(std::llround(c.bath.end / c.bath.dt)) + 1};
  const auto run = evolve_coefficients(c.params, bath, c.mode, tg, c.bath.step);
  Table t{"oracle",
          {"t", "phonon_number", "string_energy", "interaction_energy", "reservoir_energy", "ccr_defect"},
          {}};
  for (std::size_t i = 0; i < tg.count; ++i) {
    t.add({tg.time(i), run.phonon_number(i), run.string_energy[i], run.interaction_energy[i],
           run.reservoir_energy[i], run.ccr_defect[i]});
  }
  out.tables.push_back(std::move(t));
  const double fitted = fit_decay_rate(run, {c.bath.window_start, c.bath.window_end});
  auto& s = out.summary;
  s.set("command", "oracle");
  s.set("bath_modes", static_cast<double>(bath.n_modes()));
  s.set("recurrence_time", run.recurrence);
  s.set("fitted_number_decay_rate", fitted);
  s.pair("number_decay_vs_emission_rate", emission_rate(c.params, c.coupling, c.mode).rate, fitted);
  if (c.coupling.kind() == CouplingKind::PaperOhmic) {
    // The beta/lambda number-decay figure quoted for the Ohmic model, for comparison.
    s.pair("number_decay_vs_beta_over_lambda", c.coupling.ohmic_beta() / c.params.lambda, fitted);
  }
  s.set("ccr_defect_max", *std::max_element(run.ccr_defect.begin(), run.ccr_defect.end()));
  return out;
}

inline RunOutput run_shapes(const RunConfig& c) {
  RunOutput out;
  const auto shapes = source_shapes(c.coupling, c.radii);
  Table t{"shapes", {"r", "P", "Q"}, {}};
  for (std::size_t i = 0; i < shapes.r_grid.size(); ++i) t.add({shapes.r_grid[i], shapes.P[i], shapes.Q[i]});
  out.tables.push_back(std::move(t));
  auto& s = out.summary;
  s.set("command", "shapes");
  const double upper = c.coupling.cutoff().value_or(c.coupling.support_end());
  if (c.coupling.kind() == CouplingKind::PaperOhmic && !c.radii.empty() && c.radii.front() == 0.0) {
    const double k = 4.0 * pi * std::sqrt(c.coupling.ohmic_beta() /
                                          (8.0 * pi * pi * std::pow(2.0 * pi, 3) * c.coupling.ohmic_length()));
    s.pair("P0", k * upper * upper / 2.0, shapes.P.front());
  }
  // Plane wave just below the cutoff in a box that resolves it.
  const PeriodicBox box{2.0 * pi * 4.0 / upper * std::sqrt(3.0), 16};
  const FieldSample wave{{{1, 2, 3}, cd(0.6, -0.8)}, {{-2, 1, 0}, cd(0.3, 0.1)}};
  s.set("hamiltonian_identity_defect", bath_hamiltonian_identity(c.coupling, box, {wave}));
  return out;
}

}  // namespace detail

inline RunOutput execute(const RunConfig& c) {
  switch (c.command) {
    case Command::Kernel: return detail::run_kernel(c);
    case Command::Evolve: return detail::run_evolve(c);
    case Command::Energies: return detail::run_energies(c);
    case Command::Rates: return detail::run_rates(c);
    case Command::Oracle: return detail::run_oracle(c);
    case Command::Shapes: return detail::run_shapes(c);
  }
  fail(ErrorKind::InvalidArgument, "unknown command");
}

inline std::string output_path(const std::string& prefix, const std::string& name) { return prefix + "_" + name; }

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open " + path + " for writing");
  f << content;
  f.close();
  if (!f) fail(ErrorKind::Io, "failed writing " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigParse: return 2;
    case ErrorKind::Io: return 4;
    default: return 3;
  }
}

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<std::string> out_prefix;
  unsigned threads = 1;
};

/// Full tool behaviour; returns the process exit status and reports errors on `err`.
inline int run(const Invocation& inv, std::ostream& err) {
  try {
    const auto command = parse_command(inv.command);
    if (!command) fail(ErrorKind::ConfigParse, "unknown command '" + inv.command + "'");
    const std::string text = read_file(inv.config_path);
    RunConfig config = parse_config(text, *command);
    if (inv.out_prefix) config.prefix = *inv.out_prefix;
    set_thread_count(inv.threads);
    const RunOutput out = execute(config);
    for (const auto& t : out.tables) write_file(output_path(config.prefix, t.name + ".csv"), to_csv(t));
    write_file(output_path(config.prefix, "summary.txt"), out.summary.text());
    return 0;
  } catch (const Error& e) {
    err << "dstring: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "dstring: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace dstring
