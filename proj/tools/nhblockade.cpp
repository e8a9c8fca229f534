// nhblockade <sweep|heatmap|eps|conditions|validate-full|distribution>
//            --config <path> [--out <path>] [--format csv|json] [--workers N]
//
// Exit codes: 0 ok, 2 config error, 3 solver failure (> 5% of rows), 4 condition not found.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nhblockade/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitNotFound = 4;
constexpr double kFailureThreshold = 0.05;

struct Options {
  std::string config;
  std::string out;
  std::string format;
  std::size_t workers = 0;
  std::string kind;
};

std::size_t env_workers() {
  const char* v = std::getenv("NHBLOCKADE_WORKERS");
  if (!v || !*v) return 0;
  try {
    const long n = std::stol(v);
    if (n < 1) throw nhblockade::ConfigError("NHBLOCKADE_WORKERS must be >= 1");
    return static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw nhblockade::ConfigError(std::string("NHBLOCKADE_WORKERS is not a positive integer: ") + v);
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw nhblockade::ConfigError("cannot write " + path);
  os << text;
}

void emit_table(const nhblockade::SweepResult& r, const std::string& path, const std::string& format) {
  if (format == "json") {
    write_text(path, nhblockade::dump_json(nhblockade::to_json(r)));
    return;
  }
  std::ostringstream os;
  nhblockade::write_csv(os, r);
  write_text(path, os.str());
  if (!path.empty()) write_text(path + ".meta.json", nhblockade::dump_json(r.metadata));
}

int table_status(const nhblockade::SweepResult& r) {
  if (r.failure_fraction() > kFailureThreshold) {
    std::cerr << "nhblockade: " << r.failures() << " of " << r.rows.size() << " points failed\n";
    return kExitSolver;
  }
  return kExitOk;
}

int run(const std::string& command, const Options& opt) {
  using namespace nhblockade;
  ExperimentConfig cfg = load_config(opt.config);
  if (const std::size_t w = env_workers()) cfg.workers = w;
  if (opt.workers > 0) cfg.workers = opt.workers;
  if (!opt.out.empty()) cfg.output.path = opt.out;
  if (!opt.format.empty()) cfg.output.format = opt.format;
  if (!opt.kind.empty()) cfg.condition_kind = opt.kind;
  for (const auto& w : cfg.model.warnings()) std::cerr << "warning: " << w << "\n";

  if (command == "eps" || command == "conditions") {
    const auto sol = command == "eps" ? run_eps(cfg) : run_conditions(cfg, cfg.condition_kind);
    for (const auto& d : sol.diagnostics) std::cerr << "note: " << d << "\n";
    json doc = to_json(sol);
    doc["config"] = to_json(cfg);
    write_text(cfg.output.path, dump_json(doc));
    return sol.found() ? kExitOk : kExitNotFound;
  }

  SweepResult r;
  if (command == "sweep") {
    r = run_sweep(cfg);
  } else if (command == "heatmap") {
    r = run_heatmap(cfg);
  } else if (command == "validate-full") {
    r = run_validate_full(cfg);
  } else {
    r = run_distribution(cfg);
  }
  emit_table(r, cfg.output.path, cfg.output.format);
  return table_status(r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon blockade in a non-Hermitian two-mode Kerr resonator"};
  app.require_subcommand(1);
  Options opt;
  for (const char* name : {"sweep", "heatmap", "eps", "conditions", "validate-full", "distribution"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "JSON experiment configuration")->required();
    sub->add_option("--out", opt.out, "output path (default: config output.path, else stdout)");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", opt.workers, "parallel workers (default: NHBLOCKADE_WORKERS or config)")
        ->check(CLI::PositiveNumber);
    if (std::string(name) == "conditions") {
      sub->add_option("--kind", opt.kind, "cpb, cpb-non-ep or upb")
          ->check(CLI::IsMember({"cpb", "cpb-non-ep", "upb"}));
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const nhblockade::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nhblockade::LayoutError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nhblockade::ConditionNotFound& e) {
    std::cerr << "condition not found: " << e.what() << "\n";
    return kExitNotFound;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
}
