#include "aggspec/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "aggspec/config.hpp"
#include "aggspec/diagnostics.hpp"
#include "aggspec/version.hpp"

namespace aggspec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format;
  bool force = false;
  bool quiet = false;
};

struct RunSummary {
  int exit_code = kExitOk;
  std::string report;
};

void apply_overrides(SimulationConfig& cfg, const RunOptions& opt) {
  if (opt.seed) cfg.initial.seed = *opt.seed;
  if (!opt.output.empty()) cfg.output.directory = opt.output;
  if (!opt.format.empty()) {
    try {
      cfg.output.format = record_format_from_string(opt.format);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--format: ") + e.what());
    }
  }
}

bool has_outputs(const fs::path& dir) {
  for (const char* name : {"record.csv", "record.bin", "report.tsv", "spectra.csv", "config.json"}) {
    if (fs::exists(dir / name)) return true;
  }
  return fs::exists(dir) && fs::is_directory(dir) &&
         std::any_of(fs::directory_iterator(dir), fs::directory_iterator(), [](const auto& e) {
           return e.path().filename().string().rfind("run_", 0) == 0;
         });
}

void prepare_directory(const fs::path& dir, bool force) {
  if (has_outputs(dir) && !force) {
    throw UsageError("refusing to overwrite outputs in '" + dir.string() + "' (use --force)");
  }
  fs::create_directories(dir);
}

void write_spectra(const SimulationRecord& record, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw RecordError("cannot write '" + path.string() + "'");
  out << "t,species_index,k,amplitude\n" << std::setprecision(17);
  const std::size_t m = record.grid.size();
  std::vector<Complex> hat(record.grid.spectrum_size());
  for (const auto& frame : record.frames) {
    for (std::size_t i = 0; i < record.species; ++i) {
      forward(record.grid, std::span<const double>(frame.values).subspan(i * m, m), hat);
      for (std::size_t k = 0; k < hat.size(); ++k) {
        out << frame.t << ',' << i << ',' << k << ',' << std::abs(hat[k]) << '\n';
      }
    }
  }
}

std::string unclassified_line(const std::string& run_id, const std::string& label) {
  return run_id + '\t' + label + "\tnan\tnan\tnan";
}

// Runs one configuration into cfg.output.directory. Config problems propagate.
RunSummary execute(const SimulationConfig& cfg, const std::string& run_id, bool force, std::ostream& log) {
  const fs::path dir = cfg.output.directory;
  prepare_directory(dir, force);

  const ModelParams params = build_params(cfg);
  const State initial = make_initial_condition(cfg);
  const double parameter = params.kernel.parameter();
  RecordHeader header;
  header.code_version = kVersion;
  header.seed = cfg.initial.seed;
  const json resolved = to_json(cfg, std::isfinite(parameter) ? std::optional(parameter) : std::nullopt);
  json echo = resolved;
  // The record describes the simulation, not where it was written.
  echo["output"].erase("directory");
  header.config_json = echo.dump();

  RunSummary summary;
  RunResult result = [&] {
    try {
      return run(initial, params, cfg.integrator, header);
    } catch (const MonitorError& e) {
      summary.exit_code = kExitBlowup;
      log << run_id << ": monitor failure at t=" << e.time() << ": " << e.what() << '\n';
      RunResult failed{initial, Outcome::Blowup, e.time(), SimulationRecord(cfg.grid(), cfg.species), {}, {}, e.what()};
      failed.snapshots.header = header;
      return failed;
    }
  }();
  for (const auto& w : result.warnings) log << run_id << ": warning: " << w << '\n';

  const fs::path record_path = dir / ("record" + record_extension(cfg.output.format));
  write_record(result.snapshots, record_path.string(), cfg.output.format);
  if (cfg.output.emit_spectra) write_spectra(result.snapshots, dir / "spectra.csv");
  {
    std::ofstream conf(dir / "config.json");
    conf << resolved.dump(2) << '\n';
  }

  if (result.outcome == Outcome::Blowup) {
    summary.exit_code = kExitBlowup;
    summary.report = unclassified_line(run_id, "Blowup");
    if (!result.failure.empty()) log << run_id << ": blowup at t=" << result.outcome_time << ": " << result.failure << '\n';
  } else if (result.snapshots.frames.size() < 10) {
    summary.report = unclassified_line(run_id, "Unclassified");
    log << run_id << ": fewer than 10 snapshots, pattern left unclassified\n";
  } else {
    summary.report = report_line(run_id, classify(result));
  }
  std::ofstream report(dir / "report.tsv");
  report << report_header() << '\n' << summary.report << '\n';
  log << run_id << ": " << to_string(result.outcome) << " at t=" << result.outcome_time << " -> "
      << record_path.string() << '\n';
  return summary;
}

json::json_pointer to_pointer(const std::string& key) {
  if (!key.empty() && key.front() == '/') return json::json_pointer(key);
  std::string p;
  std::istringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) p += '/' + part;
  return json::json_pointer(p);
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;  // bare word, e.g. a kernel family
  }
}

struct Variation {
  json::json_pointer pointer;
  std::string key;
  std::vector<json> values;
};

Variation parse_vary(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw UsageError("--vary expects key=v1,v2,... got '" + spec + "'");
  }
  Variation v;
  v.key = spec.substr(0, eq);
  try {
    v.pointer = to_pointer(v.key);
  } catch (const json::exception& e) {
    throw UsageError("--vary: bad key '" + v.key + "': " + e.what());
  }
  std::istringstream items(spec.substr(eq + 1));
  std::string item;
  while (std::getline(items, item, ',')) v.values.push_back(parse_value(item));
  return v;
}

std::size_t thread_count(int requested) {
  if (requested > 0) return static_cast<std::size_t>(requested);
  if (const char* env = std::getenv("AGGSPEC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_run(const std::string& path, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  SimulationConfig cfg = parse_config(path);
  apply_overrides(cfg, opt);
  std::ostringstream sink;
  const RunSummary s = execute(cfg, "run", opt.force, opt.quiet ? static_cast<std::ostream&>(sink) : err);
  out << report_header() << '\n' << s.report << '\n';
  return s.exit_code;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& vary, int threads,
              const RunOptions& opt, std::ostream& out, std::ostream& err) {
  json base = load_json(path);
  std::vector<Variation> axes;
  for (const auto& spec : vary) axes.push_back(parse_vary(spec));
  if (axes.empty()) throw UsageError("sweep needs at least one --vary key=values");

  // Cartesian product, last axis fastest.
  std::vector<json> docs{base};
  for (const auto& axis : axes) {
    std::vector<json> next;
    for (const auto& d : docs) {
      for (const auto& value : axis.values) {
        json copy = d;
        try {
          copy[axis.pointer] = value;
        } catch (const json::exception& e) {
          throw ConfigError({"--vary '" + axis.key + "': " + e.what()});
        }
        next.push_back(std::move(copy));
      }
    }
    docs = std::move(next);
  }

  // Validate every point before running any.
  std::vector<SimulationConfig> configs;
  std::vector<std::string> problems;
  for (std::size_t r = 0; r < docs.size(); ++r) {
    try {
      configs.push_back(parse_config_json(docs[r]));
    } catch (const ConfigError& e) {
      for (const auto& p : e.problems()) problems.push_back("sweep point " + std::to_string(r) + ": " + p);
    }
  }
  if (!problems.empty()) throw ConfigError(problems);

  std::string root = opt.output.empty() ? configs.front().output.directory : opt.output;
  prepare_directory(root, opt.force);
  std::vector<std::string> ids(configs.size());
  for (std::size_t r = 0; r < configs.size(); ++r) {
    char id[32];
    std::snprintf(id, sizeof id, "run_%03zu", r);
    ids[r] = id;
    RunOptions local = opt;
    local.output = (fs::path(root) / id).string();
    apply_overrides(configs[r], local);
  }

  std::vector<RunSummary> results(configs.size());
  std::vector<std::string> failures(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < configs.size();) {
      std::ostringstream log;
      try {
        results[r] = execute(configs[r], ids[r], true, log);
      } catch (const std::exception& e) {
        failures[r] = e.what();
        results[r] = {kExitDataError, unclassified_line(ids[r], "Failed")};
      }
      std::lock_guard lock(log_mutex);
      if (!opt.quiet) err << log.str();
      if (!failures[r].empty()) err << ids[r] << ": " << failures[r] << '\n';
    }
  };
  const std::size_t n_threads = std::min(thread_count(threads), configs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream report(fs::path(root) / "report.tsv");
  report << report_header() << '\n';
  out << report_header() << '\n';
  int code = kExitOk;
  for (std::size_t r = 0; r < results.size(); ++r) {
    report << results[r].report << '\n';
    out << results[r].report << '\n';
    code = std::max(code, results[r].exit_code);
  }
  return code;
}

int cmd_kernel(const std::string& family_name, std::optional<double> sigma, std::optional<double> param,
               std::size_t points, double length, std::ostream& out) {
  const Grid grid(points, length);
  const KernelFamily family = kernel_family_from_string(family_name);
  if (family == KernelFamily::Custom) throw UsageError("kernel: custom kernels are loaded from a file");
  if (sigma.has_value() == param.has_value()) throw UsageError("kernel: give exactly one of --sigma and --param");
  const double p = param ? *param : solve_param_for_sigma(family, *sigma, grid);
  const Kernel k = make_kernel(family, grid, p);
  out << std::setprecision(17) << "# family: " << to_string(family) << "\n# parameter: " << p
      << "\n# sigma: " << kernel_sigma(k) << "\nx,value\n";
  for (std::size_t m = 0; m < grid.size(); ++m) out << grid.x(m) << ',' << k.samples()[m] << '\n';
  return kExitOk;
}

int cmd_check(const std::string& path, double mass_tol, std::ostream& out) {
  const SimulationRecord record = read_record(path);
  validate_record(record);
  if (record.frames.empty()) throw RecordError("record has no frames");
  const std::size_t m = record.grid.size();
  const double dx = record.grid.dx();
  std::vector<double> m0(record.species, 0.0);
  double drift = 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < record.frames.size(); ++f) {
    const auto& v = record.frames[f].values;
    for (std::size_t i = 0; i < record.species; ++i) {
      double mass = 0.0;
      for (std::size_t x = 0; x < m; ++x) {
        mass += v[i * m + x];
        lowest = std::min(lowest, v[i * m + x]);
      }
      mass *= dx;
      if (f == 0) m0[i] = mass;
      drift = std::max(drift, std::abs(mass - m0[i]) / std::abs(m0[i]));
    }
  }
  const bool ok = drift <= mass_tol && lowest > 0.0;
  out << std::setprecision(6) << "frames " << record.frames.size() << "\nmax_relative_mass_drift " << drift
      << "\nmin_value " << lowest << '\n'
      << (ok ? "OK" : "FAILED") << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pseudo-spectral solver for nonlocal multi-species aggregation-diffusion", "aggspec"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunOptions opt;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Override initial_condition.seed");
    sub->add_option("--output", opt.output, "Output directory");
    sub->add_option("--format", opt.format, "Record format: csv or binary");
    sub->add_flag("--force", opt.force, "Overwrite existing outputs");
    sub->add_flag("--quiet", opt.quiet, "Suppress progress messages");
  };

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Integrate one configuration");
  run_cmd->add_option("config", config_path, "JSON configuration")->required();
  add_common(run_cmd);

  std::string sweep_path;
  std::vector<std::string> vary;
  int threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the cartesian product of parameter lists");
  sweep_cmd->add_option("config", sweep_path, "Base JSON configuration")->required();
  sweep_cmd->add_option("--vary", vary, "key=v1,v2,... (dotted path or JSON pointer)")->required();
  sweep_cmd->add_option("--threads", threads, "Worker threads (default AGGSPEC_THREADS or all cores)");
  add_common(sweep_cmd);

  std::string family;
  std::optional<double> sigma;
  std::optional<double> param;
  std::size_t points = 128;
  double length = 1.0;
  auto* kernel_cmd = app.add_subcommand("kernel", "Print kernel samples for a family and width");
  kernel_cmd->add_option("family", family, "vonmises or tophat")->required();
  kernel_cmd->add_option("--sigma", sigma, "Target standard deviation");
  kernel_cmd->add_option("--param", param, "Family parameter (a or gamma)");
  kernel_cmd->add_option("--M", points, "Grid points");
  kernel_cmd->add_option("--L", length, "Domain length");

  std::string record_path;
  double mass_tol = 1e-8;
  auto* check_cmd = app.add_subcommand("check", "Check mass conservation and positivity of a record");
  check_cmd->add_option("record", record_path, "Record file (csv or binary)")->required();
  check_cmd->add_option("--mass-tol", mass_tol, "Allowed relative mass drift");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    return kExitUsage;
  }
  if (run_cmd->count_all() + sweep_cmd->count_all() > 0 && (run_cmd->count("--seed") || sweep_cmd->count("--seed"))) {
    opt.seed = seed;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, opt, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_path, vary, threads, opt, out, err);
    if (*kernel_cmd) return cmd_kernel(family, sigma, param, points, length, out);
    if (*check_cmd) return cmd_check(record_path, mass_tol, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const RecordError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoError;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace aggspec
