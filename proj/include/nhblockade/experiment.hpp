#pragma once

// Experiment orchestration behind the nhblockade command-line tool: JSON
// configuration, parameter grids, a deterministic worker pool, and CSV/JSON
// serialisation of sweep tables.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"
#include "nhblockade/analytics.hpp"
#include "nhblockade/error.hpp"
#include "nhblockade/liouville.hpp"
#include "nhblockade/model.hpp"
#include "nhblockade/observables.hpp"
#include "nhblockade/validation.hpp"

namespace nhblockade {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

/// Grid along one axis, either start/stop/points (inclusive, evenly spaced) or
/// an explicit list of values.
struct AxisSpec {
  double start = 0.0;
  double stop = 0.0;
  std::size_t points = 0;
  std::vector<double> explicit_values;

  std::vector<double> values() const {
    if (!explicit_values.empty()) return explicit_values;
    std::vector<double> v(points);
    for (std::size_t k = 0; k < points; ++k) {
      v[k] = k + 1 == points ? stop : start + (stop - start) * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    return v;
  }

  void validate(const std::string& name) const {
    if (!explicit_values.empty()) return;
    if (!(start < stop)) throw ConfigError("sweep." + name + ": start must be < stop");
    if (points < 2) throw ConfigError("sweep." + name + ": points must be >= 2");
  }
};

enum class SweepAxis { none, mu, delta, mu_delta };

struct SweepSpec {
  SweepAxis axis = SweepAxis::none;
  std::optional<AxisSpec> mu_over_pi;
  std::optional<AxisSpec> delta;
};

struct OutputSpec {
  std::string path;       // empty: stdout
  std::string format = "csv";
  bool include_timing = false;
};

struct ExperimentConfig {
  ModelParams model;
  SolverConfig solver;
  SteadyMethod method = SteadyMethod::liouvillian_eigen;
  std::vector<std::size_t> dims{4, 4};
  FullModelConfig full;
  SweepSpec sweep;
  OutputSpec output;
  std::size_t workers = 1;
  // eps / conditions
  std::string condition_kind = "cpb";
  int n_min = 1;
  int n_max = 0;  // 0: 2m - 1
  double magnitude_tol = 1e-9;
  // distribution
  std::size_t mode = kCw;

  FockLayout layout() const { return FockLayout(dims); }
};

namespace config_detail {

inline Complex parse_complex(const json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("re")) return {j.at("re").get<double>(), j.value("im", 0.0)};
  throw ConfigError(key + " must be a number, [re, im] or {\"re\", \"im\"}");
}

inline AxisSpec parse_axis(const json& j, const std::string& name) {
  AxisSpec a;
  if (j.contains("values")) {
    a.explicit_values = j.at("values").get<std::vector<double>>();
    if (a.explicit_values.empty()) throw ConfigError("sweep." + name + ".values must be non-empty");
  } else {
    a.start = j.at("start").get<double>();
    a.stop = j.at("stop").get<double>();
    a.points = j.at("points").get<std::size_t>();
  }
  a.validate(name);
  return a;
}

inline json axis_to_json(const AxisSpec& a) {
  if (!a.explicit_values.empty()) return {{"values", a.explicit_values}};
  return {{"start", a.start}, {"stop", a.stop}, {"points", a.points}};
}

inline SteadyMethod parse_method(const std::string& s) {
  if (s == "eigen" || s == "liouvillian-eigen") return SteadyMethod::liouvillian_eigen;
  if (s == "evolve" || s == "time-evolution") return SteadyMethod::time_evolution;
  throw ConfigError("solver.method must be 'eigen' or 'evolve', got '" + s + "'");
}

inline std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::mu: return "mu";
    case SweepAxis::delta: return "delta";
    case SweepAxis::mu_delta: return "mu_delta";
    default: return "none";
  }
}

}  // namespace config_detail

/// Parse a configuration document. Angles come as "mu_over_pi" (or "mu" in
/// radians); rates and frequencies in units of gamma.
inline ExperimentConfig parse_config(const json& j) {
  using namespace config_detail;
  ExperimentConfig c;
  try {
    const json& m = j.at("model");
    c.model.lambda1 = parse_complex(m.at("lambda1"), "model.lambda1");
    c.model.lambda2 = parse_complex(m.at("lambda2"), "model.lambda2");
    c.model.m = m.value("m", 1);
    if (m.contains("mu_over_pi")) {
      c.model.mu = m.at("mu_over_pi").get<double>() * kPi;
    } else {
      c.model.mu = m.value("mu", 0.0);
    }
    c.model.delta = m.value("delta", 0.0);
    c.model.U = m.value("U", 0.0);
    c.model.gamma = m.value("gamma", 1.0);
    c.model.F = m.value("F", 0.0);
    if (m.contains("omega_m")) c.model.omega_m = m.at("omega_m").get<double>();
    if (m.contains("g")) c.model.g = m.at("g").get<double>();

    if (j.contains("solver")) {
      const json& s = j.at("solver");
      c.method = parse_method(s.value("method", std::string("eigen")));
      if (s.contains("dims")) c.dims = s.at("dims").get<std::vector<std::size_t>>();
      c.solver.dt = s.value("dt", c.solver.dt);
      c.solver.t_max = s.value("t_max", c.solver.t_max);
      c.solver.tol = s.value("tol", c.solver.tol);
      c.solver.decay_scale = s.value("decay_scale", c.solver.decay_scale);
      c.full.mech_dim = s.value("mech_dim", c.full.mech_dim);
      c.full.dt = s.value("full_dt", c.full.dt);
      c.full.t_settle = s.value("t_settle", c.full.t_settle);
      c.full.average_periods = s.value("average_periods", c.full.average_periods);
      c.full.check_truncation = s.value("check_truncation", c.full.check_truncation);
      c.full.truncation_tol = s.value("truncation_tol", c.full.truncation_tol);
      c.full.kerr_rel_tol = s.value("kerr_rel_tol", c.full.kerr_rel_tol);
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      const std::string axis = s.value("axis", std::string("none"));
      if (axis == "mu") {
        c.sweep.axis = SweepAxis::mu;
      } else if (axis == "delta") {
        c.sweep.axis = SweepAxis::delta;
      } else if (axis == "mu_delta" || axis == "mu×delta" || axis == "mu*delta") {
        c.sweep.axis = SweepAxis::mu_delta;
      } else if (axis != "none") {
        throw ConfigError("sweep.axis must be mu, delta or mu_delta");
      }
      if (s.contains("mu_over_pi")) c.sweep.mu_over_pi = parse_axis(s.at("mu_over_pi"), "mu_over_pi");
      if (s.contains("delta")) c.sweep.delta = parse_axis(s.at("delta"), "delta");
      const bool need_mu = c.sweep.axis == SweepAxis::mu || c.sweep.axis == SweepAxis::mu_delta;
      const bool need_delta = c.sweep.axis == SweepAxis::delta || c.sweep.axis == SweepAxis::mu_delta;
      if (need_mu && !c.sweep.mu_over_pi) throw ConfigError("sweep needs a mu_over_pi axis");
      if (need_delta && !c.sweep.delta) throw ConfigError("sweep needs a delta axis");
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      c.output.path = o.value("path", std::string());
      c.output.format = o.value("format", std::string("csv"));
      c.output.include_timing = o.value("include_timing", false);
    }
    if (j.contains("parallelism")) c.workers = j.at("parallelism").value("workers", std::size_t{1});
    if (j.contains("conditions")) {
      const json& k = j.at("conditions");
      c.condition_kind = k.value("kind", c.condition_kind);
      c.n_min = k.value("n_min", c.n_min);
      c.n_max = k.value("n_max", c.n_max);
      c.magnitude_tol = k.value("magnitude_tol", c.magnitude_tol);
    }
    if (j.contains("distribution")) c.mode = j.at("distribution").value("mode", c.mode);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.output.format != "csv" && c.output.format != "json") throw ConfigError("output.format must be csv or json");
  if (c.workers < 1) throw ConfigError("parallelism.workers must be >= 1");
  (void)c.layout();  // validates dims
  c.model.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

/// Full configuration with defaults filled in; parse_config(to_json(c)) == c.
inline json to_json(const ExperimentConfig& c) {
  using namespace config_detail;
  json model = {{"lambda1", {c.model.lambda1.real(), c.model.lambda1.imag()}},
                {"lambda2", {c.model.lambda2.real(), c.model.lambda2.imag()}},
                {"m", c.model.m},
                {"mu", c.model.mu},
                {"delta", c.model.delta},
                {"U", c.model.U},
                {"gamma", c.model.gamma},
                {"F", c.model.F}};
  if (c.model.omega_m) model["omega_m"] = *c.model.omega_m;
  if (c.model.g) model["g"] = *c.model.g;
  json solver = {{"method", c.method == SteadyMethod::liouvillian_eigen ? "eigen" : "evolve"},
                 {"dims", c.dims},
                 {"dt", c.solver.dt},
                 {"t_max", c.solver.t_max},
                 {"tol", c.solver.tol},
                 {"decay_scale", c.solver.decay_scale},
                 {"mech_dim", c.full.mech_dim},
                 {"full_dt", c.full.dt},
                 {"t_settle", c.full.t_settle},
                 {"average_periods", c.full.average_periods},
                 {"check_truncation", c.full.check_truncation},
                 {"truncation_tol", c.full.truncation_tol},
                 {"kerr_rel_tol", c.full.kerr_rel_tol}};
  json sweep = {{"axis", axis_name(c.sweep.axis)}};
  if (c.sweep.mu_over_pi) sweep["mu_over_pi"] = axis_to_json(*c.sweep.mu_over_pi);
  if (c.sweep.delta) sweep["delta"] = axis_to_json(*c.sweep.delta);
  return {{"model", model},
          {"solver", solver},
          {"sweep", sweep},
          {"output", {{"path", c.output.path}, {"format", c.output.format}, {"include_timing", c.output.include_timing}}},
          {"parallelism", {{"workers", c.workers}}},
          {"conditions",
           {{"kind", c.condition_kind}, {"n_min", c.n_min}, {"n_max", c.n_max}, {"magnitude_tol", c.magnitude_tol}}},
          {"distribution", {{"mode", c.mode}}}};
}

// ---------------------------------------------------------------------------
// Results

/// Missing numbers are NaN; text cells carry status tags and error messages.
using Cell = std::variant<double, std::string>;

struct SweepResult {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<bool> converged;  // one per row, also present as a column
  json metadata = json::object();

  std::size_t failures() const { return static_cast<std::size_t>(std::count(converged.begin(), converged.end(), false)); }
  double failure_fraction() const { return rows.empty() ? 0.0 : static_cast<double>(failures()) / rows.size(); }

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column " + name);
    return static_cast<std::size_t>(it - columns.begin());
  }
  double number(std::size_t row, const std::string& name) const {
    const auto& c = rows.at(row).at(column(name));
    return std::holds_alternative<double>(c) ? std::get<double>(c) : std::numeric_limits<double>::quiet_NaN();
  }
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// 17 significant digits; NaN as empty, infinities as inf / -inf.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& os, const SweepResult& r) {
  for (std::size_t k = 0; k < r.columns.size(); ++k) os << (k ? "," : "") << r.columns[k];
  os << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) os << ",";
      if (std::holds_alternative<double>(row[k])) {
        os << format_number(std::get<double>(row[k]));
      } else {
        os << csv_escape(std::get<std::string>(row[k]));
      }
    }
    os << "\n";
  }
}

inline json cell_to_json(const Cell& c) {
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  const double v = std::get<double>(c);
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline json to_json(const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json o = json::object();
    for (std::size_t k = 0; k < row.size(); ++k) o[r.columns[k]] = cell_to_json(row[k]);
    rows.push_back(std::move(o));
  }
  return {{"metadata", r.metadata}, {"columns", r.columns}, {"rows", std::move(rows)}};
}

/// JSON with numbers printed to 17 significant digits.
inline std::string dump_json(const json& j) {
  std::string out;
  std::function<void(const json&, int)> emit = [&](const json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    if (v.is_object()) {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + json(it.key()).dump() + ": ";
        emit(it.value(), indent + 1);
      }
      out += "\n" + pad + "}";
    } else if (v.is_array()) {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ", ";
        first = false;
        emit(e, indent + 1);
      }
      out += "]";
    } else if (v.is_number_float()) {
      out += format_number(v.get<double>());
    } else {
      out += v.dump();
    }
  };
  emit(j, 0);
  return out + "\n";
}

// ---------------------------------------------------------------------------
// Worker pool

/// Evaluate f(k) for k in [0, n) on `workers` threads; results land in index
/// order, so output does not depend on scheduling.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, std::size_t workers, F&& f) {
  std::vector<T> out(n);
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) out[k] = f(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) out[k] = f(k);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

struct GridPoint {
  double mu = 0.0;
  double delta = 0.0;
};

/// Grid in row-major order: mu outer, delta inner.
inline std::vector<GridPoint> build_grid(const ExperimentConfig& c) {
  std::vector<double> mus{c.model.mu}, deltas{c.model.delta};
  if (c.sweep.axis == SweepAxis::mu || c.sweep.axis == SweepAxis::mu_delta) {
    mus.clear();
    for (double v : c.sweep.mu_over_pi->values()) mus.push_back(v * kPi);
  }
  if (c.sweep.axis == SweepAxis::delta || c.sweep.axis == SweepAxis::mu_delta) deltas = c.sweep.delta->values();
  std::vector<GridPoint> grid;
  for (double mu : mus) {
    for (double d : deltas) grid.push_back({mu, d});
  }
  return grid;
}

namespace experiment_detail {

inline json base_metadata(const ExperimentConfig& c, const std::string& command) {
  return {{"command", command}, {"config", to_json(c)}, {"layout", c.layout().dims()}};
}

inline void finish_metadata(SweepResult& r, std::chrono::steady_clock::time_point t0, const ExperimentConfig& c) {
  r.metadata["rows"] = r.rows.size();
  r.metadata["failures"] = r.failures();
  if (c.output.include_timing) {
    r.metadata["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
}

inline Cell tagged_cell(const TaggedValue& v) { return v.value; }
inline Cell status_cell(const TaggedValue& v) { return to_string(v.status); }

}  // namespace experiment_detail

/// Steady state and observables at every grid point (subcommand `sweep`).
inline SweepResult run_sweep(const ExperimentConfig& c) {
  using namespace experiment_detail;
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = build_grid(c);
  const FockLayout layout = c.layout();
  if (layout.modes() != 2) throw ConfigError("sweep needs 2-mode solver.dims");
  const std::size_t d1 = layout.dim(kCw);

  SweepResult r;
  r.columns = {"mu_over_pi",        "delta",        "converged", "g2_numeric",   "g2_numeric_status",
               "g2_analytic",       "g2_analytic_status",        "n1",           "n2",
               "splitting_re",      "splitting_im", "overlap",   "residual",     "method"};
  for (std::size_t n = 0; n < d1; ++n) r.columns.push_back("R" + std::to_string(n));
  r.columns.push_back("error");

  const auto rows = parallel_map<std::vector<Cell>>(grid.size(), c.workers, [&](std::size_t k) {
    ModelParams p = c.model;
    p.mu = grid[k].mu;
    p.delta = grid[k].delta;
    const auto spec = subspace_spectrum(p, Subspace::single_excitation);
    TaggedValue ga = p.F > 0.0 ? g2_analytic(p) : TaggedValue::undefined();
    std::vector<Cell> row{p.mu / kPi, p.delta, 0.0,  kNaN, std::string("undefined"), tagged_cell(ga), status_cell(ga),
                          kNaN,       kNaN,    spec.splitting.real(), spec.splitting.imag(), spec.overlap, kNaN,
                          to_string(c.method)};
    for (std::size_t n = 0; n < d1; ++n) row.push_back(kNaN);
    row.push_back(std::string());
    try {
      const auto rep = solve_steady(p, layout, c.solver, c.method);
      const auto g2 = g2_zero(rep.rho, kCw);
      const auto dist = photon_distribution(rep.rho, kCw);
      row[2] = 1.0;
      row[3] = tagged_cell(g2);
      row[4] = status_cell(g2);
      row[7] = mean_occupation(rep.rho, kCw);
      row[8] = mean_occupation(rep.rho, kCcw);
      row[12] = rep.residual;
      for (std::size_t n = 0; n < d1; ++n) row[14 + n] = dist.relative[n] ? *dist.relative[n] : kNaN;
    } catch (const std::runtime_error& e) {
      row.back() = std::string(e.what());
    }
    return row;
  });
  for (const auto& row : rows) {
    r.converged.push_back(std::get<double>(row[2]) == 1.0);
    r.rows.push_back(row);
  }
  r.metadata = base_metadata(c, "sweep");
  finish_metadata(r, t0, c);
  return r;
}

/// log10 g2 over the mu x delta grid, mu outer (subcommand `heatmap`).
inline SweepResult run_heatmap(const ExperimentConfig& c) {
  using namespace experiment_detail;
  if (c.sweep.axis != SweepAxis::mu_delta) throw ConfigError("heatmap needs sweep.axis = mu_delta");
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = build_grid(c);
  const FockLayout layout = c.layout();
  if (layout.modes() != 2) throw ConfigError("heatmap needs 2-mode solver.dims");

  SweepResult r;
  r.columns = {"mu_over_pi", "delta", "converged", "g2_numeric", "log10_g2", "g2_numeric_status", "residual", "error"};
  const auto rows = parallel_map<std::vector<Cell>>(grid.size(), c.workers, [&](std::size_t k) {
    ModelParams p = c.model;
    p.mu = grid[k].mu;
    p.delta = grid[k].delta;
    std::vector<Cell> row{p.mu / kPi, p.delta, 0.0, kNaN, kNaN, std::string("undefined"), kNaN, std::string()};
    try {
      const auto rep = solve_steady(p, layout, c.solver, c.method);
      const auto g2 = g2_zero(rep.rho, kCw);
      row[2] = 1.0;
      row[3] = g2.value;
      row[4] = g2.is_finite() && g2.value > 0.0 ? std::log10(g2.value) : kNaN;
      row[5] = status_cell(g2);
      row[6] = rep.residual;
    } catch (const std::runtime_error& e) {
      row[7] = std::string(e.what());
    }
    return row;
  });
  for (const auto& row : rows) {
    r.converged.push_back(std::get<double>(row[2]) == 1.0);
    r.rows.push_back(row);
  }
  r.metadata = base_metadata(c, "heatmap");
  finish_metadata(r, t0, c);
  return r;
}

/// Paired effective / full-model g2 over the grid (subcommand `validate-full`).
/// Kerr-consistency violations throw before any solve.
inline SweepResult run_validate_full(const ExperimentConfig& c) {
  using namespace experiment_detail;
  if (!c.model.has_mechanics()) throw ConfigError("validate-full needs model.omega_m and model.g");
  const double kerr = *c.model.induced_kerr();
  if (std::abs(c.model.U - kerr) > c.full.kerr_rel_tol * kerr) {
    throw ConfigError("U = " + format_number(c.model.U) + " is inconsistent with g^2/omega_m = " + format_number(kerr));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = build_grid(c);
  const FockLayout layout = c.layout();

  SweepResult r;
  r.columns = {"mu_over_pi",       "delta",           "converged", "g2_effective", "g2_full",
               "relative_deviation", "g2_full_doubled", "truncation_change", "error"};
  const auto rows = parallel_map<std::vector<Cell>>(grid.size(), c.workers, [&](std::size_t k) {
    ModelParams p = c.model;
    p.mu = grid[k].mu;
    p.delta = grid[k].delta;
    std::vector<Cell> row{p.mu / kPi, p.delta, 0.0, kNaN, kNaN, kNaN, kNaN, kNaN, std::string()};
    FullModelConfig fc = c.full;
    const bool check = fc.check_truncation;
    fc.check_truncation = false;
    try {
      auto rec = validate_full_vs_effective(p, layout, fc, c.solver, c.method);
      row[3] = rec.g2_effective.value;
      row[4] = rec.g2_full.value;
      row[5] = rec.relative_deviation;
      bool ok = true;
      if (check) {
        const auto doubled = full_model_state(p, layout, 2 * fc.mech_dim, fc, c.solver);
        const auto g2d = g2_zero(doubled.rho, kCw);
        const double change = relative_change(rec.g2_full, g2d);
        row[6] = g2d.value;
        row[7] = change;
        if (!(change <= fc.truncation_tol)) {
          ok = false;
          row[8] = "mechanical truncation not converged: doubling mech_dim changes g2 by " + format_number(change);
        }
      }
      row[2] = ok ? 1.0 : 0.0;
    } catch (const std::runtime_error& e) {
      row[8] = std::string(e.what());
    }
    return row;
  });
  double worst = 0.0;
  for (const auto& row : rows) {
    r.converged.push_back(std::get<double>(row[2]) == 1.0);
    const double dev = std::get<double>(row[5]);
    if (!std::isnan(dev)) worst = std::max(worst, dev);
    r.rows.push_back(row);
  }
  r.metadata = base_metadata(c, "validate-full");
  r.metadata["max_relative_deviation"] = worst;
  r.metadata["kerr_from_g"] = kerr;
  finish_metadata(r, t0, c);
  return r;
}

/// Photon-number distribution of one mode at the configured point (subcommand `distribution`).
inline SweepResult run_distribution(const ExperimentConfig& c) {
  using namespace experiment_detail;
  const auto t0 = std::chrono::steady_clock::now();
  const FockLayout layout = c.layout();
  const auto rep = solve_steady(c.model, layout, c.solver, c.method);
  const auto dist = photon_distribution(rep.rho, c.mode);
  SweepResult r;
  r.columns = {"n", "probability", "poisson_reference", "relative"};
  for (std::size_t n = 0; n < dist.probabilities.size(); ++n) {
    r.rows.push_back({static_cast<double>(n), dist.probabilities[n], dist.poisson_reference[n],
                      dist.relative[n] ? *dist.relative[n] : kNaN});
    r.converged.push_back(true);
  }
  r.metadata = base_metadata(c, "distribution");
  r.metadata["mean"] = dist.mean;
  r.metadata["g2"] = g2_zero(rep.rho, c.mode).value;
  r.metadata["residual"] = rep.residual;
  finish_metadata(r, t0, c);
  return r;
}

inline json to_json(const ConditionSolution& s) {
  std::vector<double> mu_pi;
  for (double m : s.mu_values) mu_pi.push_back(m / kPi);
  return {{"kind", to_string(s.kind)},      {"found", s.found()},          {"mu_over_pi", mu_pi},
          {"mu", s.mu_values},              {"delta", s.delta_values},     {"labels", s.labels},
          {"residuals", s.residuals},       {"diagnostics", s.diagnostics}, {"degenerate", s.degenerate}};
}

/// EP locus (subcommand `eps`).
inline ConditionSolution run_eps(const ExperimentConfig& c) {
  const int n_max = c.n_max > 0 ? c.n_max : 2 * c.model.m - 1;
  return find_eps(c.model.lambda1, c.model.lambda2, c.model.m, c.n_min, n_max, c.magnitude_tol);
}

/// Optimal conditions (subcommand `conditions --kind cpb|cpb-non-ep|upb`).
inline ConditionSolution run_conditions(const ExperimentConfig& c, const std::string& kind) {
  if (kind == "cpb") {
    const int n_max = c.n_max > 0 ? c.n_max : 2 * c.model.m - 1;
    return cpb_at_ep(c.model, c.n_min, n_max, c.magnitude_tol);
  }
  if (kind == "cpb-non-ep") return cpb_non_ep(c.model);
  if (kind == "upb") return upb_conditions(c.model);
  throw ConfigError("conditions kind must be cpb, cpb-non-ep or upb, got '" + kind + "'");
}

}  // namespace nhblockade
