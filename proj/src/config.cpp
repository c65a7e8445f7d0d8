#include "aggspec/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace aggspec {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

// Collects every violation instead of stopping at the first.
class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {}

  std::vector<std::string>& problems() { return problems_; }
  void problem(std::string p) { problems_.push_back(std::move(p)); }

  const json* find(const std::string& path) const {
    const json* node = &doc_;
    std::istringstream parts(path);
    std::string key;
    while (std::getline(parts, key, '.')) {
      if (!node->is_object()) return nullptr;
      auto it = node->find(key);
      if (it == node->end()) return nullptr;
      node = &*it;
    }
    return node;
  }

  std::optional<double> number(const std::string& path, bool required) {
    const json* n = find(path);
    if (!n) {
      if (required) problem("missing required key '" + path + "'");
      return std::nullopt;
    }
    if (!n->is_number()) {
      problem("'" + path + "' must be a number");
      return std::nullopt;
    }
    return n->get<double>();
  }

  std::optional<long long> integer(const std::string& path, bool required) {
    const json* n = find(path);
    if (!n) {
      if (required) problem("missing required key '" + path + "'");
      return std::nullopt;
    }
    if (!n->is_number_integer()) {
      problem("'" + path + "' must be an integer");
      return std::nullopt;
    }
    return n->get<long long>();
  }

  std::optional<std::string> string(const std::string& path, bool required) {
    const json* n = find(path);
    if (!n) {
      if (required) problem("missing required key '" + path + "'");
      return std::nullopt;
    }
    if (!n->is_string()) {
      problem("'" + path + "' must be a string");
      return std::nullopt;
    }
    return n->get<std::string>();
  }

  std::optional<bool> boolean(const std::string& path) {
    const json* n = find(path);
    if (!n) return std::nullopt;
    if (!n->is_boolean()) {
      problem("'" + path + "' must be true or false");
      return std::nullopt;
    }
    return n->get<bool>();
  }

  std::optional<std::vector<double>> numbers(const std::string& path, bool required) {
    const json* n = find(path);
    if (!n) {
      if (required) problem("missing required key '" + path + "'");
      return std::nullopt;
    }
    if (!n->is_array()) {
      problem("'" + path + "' must be an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& v : *n) {
      if (!v.is_number()) {
        problem("'" + path + "' must contain only numbers");
        return std::nullopt;
      }
      out.push_back(v.get<double>());
    }
    return out;
  }

 private:
  const json& doc_;
  std::vector<std::string> problems_;
};

template <class F>
void guarded(Reader& r, const std::string& key, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    r.problem("'" + key + "': " + e.what());
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open configuration file '" + path + "'"});
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError({"'" + path + "' is not valid JSON: " + e.what()});
  }
}

SimulationConfig parse_config(const std::string& path) { return parse_config_json(load_json(path)); }

SimulationConfig parse_config_json(const nlohmann::json& doc) {
  SimulationConfig cfg;
  Reader r(doc);
  if (!doc.is_object()) throw ConfigError({"configuration must be a JSON object"});

  if (auto m = r.integer("grid.M", true)) {
    if (*m <= 0 || !is_power_of_two(static_cast<std::size_t>(*m))) {
      r.problem("'grid.M' must be a power of 2, got " + std::to_string(*m));
    } else {
      cfg.points = static_cast<std::size_t>(*m);
    }
  }
  if (auto l = r.number("grid.L", true)) {
    if (!(*l > 0.0)) r.problem("'grid.L' must be positive");
    cfg.length = *l;
  }

  std::optional<std::size_t> n;
  if (auto s = r.integer("species", true)) {
    if (*s <= 0) {
      r.problem("'species' must be at least 1");
    } else {
      n = static_cast<std::size_t>(*s);
      cfg.species = *n;
    }
  }

  if (auto d = r.numbers("D", true)) {
    cfg.diffusion = *d;
    if (n && d->size() != *n) {
      r.problem("'D' has " + std::to_string(d->size()) + " entries, expected species = " + std::to_string(*n));
    }
    for (std::size_t i = 0; i < d->size(); ++i) {
      if (!((*d)[i] > 0.0)) r.problem("'D[" + std::to_string(i) + "]' must be positive");
    }
  }

  if (const json* h = r.find("H"); !h) {
    r.problem("missing required key 'H'");
  } else if (!h->is_array()) {
    r.problem("'H' must be an N x N array of rows");
  } else {
    bool ok = true;
    std::vector<double> flat;
    std::size_t cols = 0;
    for (std::size_t row = 0; row < h->size(); ++row) {
      const auto& rv = (*h)[row];
      if (!rv.is_array()) {
        ok = false;
        break;
      }
      if (row == 0) cols = rv.size();
      if (rv.size() != cols) {
        ok = false;
        break;
      }
      for (const auto& v : rv) {
        if (!v.is_number()) {
          ok = false;
          break;
        }
        flat.push_back(v.get<double>());
      }
    }
    if (!ok) {
      r.problem("'H' must be a rectangular array of numeric rows");
    } else if (n && (h->size() != *n || cols != *n)) {
      r.problem("'H' is " + std::to_string(h->size()) + "x" + std::to_string(cols) + ", expected " +
                std::to_string(*n) + "x" + std::to_string(*n));
    } else {
      cfg.interaction = std::move(flat);
    }
  }

  if (auto fam = r.string("kernel.family", true)) {
    guarded(r, "kernel.family", [&] { cfg.kernel.family = kernel_family_from_string(*fam); });
  }
  cfg.kernel.parameter = r.number("kernel.parameter", false);
  cfg.kernel.sigma_target = r.number("kernel.sigma_target", false);
  if (auto f = r.string("kernel.file", false)) cfg.kernel.file = *f;
  if (auto a = r.boolean("kernel.analytic_spectrum")) cfg.kernel.analytic_spectrum = *a;
  if (cfg.kernel.family == KernelFamily::Custom) {
    if (cfg.kernel.file.empty()) r.problem("custom kernels need 'kernel.file'");
  } else if (cfg.kernel.parameter.has_value() == cfg.kernel.sigma_target.has_value()) {
    r.problem("exactly one of 'kernel.parameter' and 'kernel.sigma_target' must be given");
  }
  if (auto d = r.boolean("dealias")) cfg.dealias = *d;

  auto& ic = cfg.initial;
  if (auto kind = r.string("initial_condition.kind", false)) {
    if (*kind == "perturbed_homogeneous" || *kind == "homogeneous+perturbation") {
      ic.kind = InitialKind::PerturbedHomogeneous;
    } else if (*kind == "from_file") {
      ic.kind = InitialKind::FromFile;
    } else {
      r.problem("'initial_condition.kind' must be perturbed_homogeneous or from_file");
    }
  }
  if (auto means = r.numbers("initial_condition.means", false)) {
    ic.means = *means;
    if (n && means->size() != *n) r.problem("'initial_condition.means' needs one entry per species");
    for (double v : *means) {
      if (!(v > 0.0)) r.problem("'initial_condition.means' entries must be positive");
    }
  } else if (n) {
    ic.means.assign(*n, 1.0);
  }
  if (auto a = r.number("initial_condition.perturbation_amplitude", false)) {
    if (*a < 0.0) r.problem("'initial_condition.perturbation_amplitude' must be non-negative");
    ic.perturbation_amplitude = *a;
  }
  if (auto k = r.integer("initial_condition.perturbation_max_mode", false)) {
    if (*k < 0 || static_cast<std::size_t>(*k) >= cfg.points / 2) {
      r.problem("'initial_condition.perturbation_max_mode' must lie in [0, M/2)");
    }
    ic.perturbation_max_mode = static_cast<int>(*k);
  }
  if (auto s = r.integer("initial_condition.seed", false)) {
    if (*s < 0) r.problem("'initial_condition.seed' must be non-negative");
    ic.seed = static_cast<std::uint64_t>(*s);
  }
  if (auto p = r.string("initial_condition.path", false)) ic.path = *p;
  if (ic.kind == InitialKind::FromFile && ic.path.empty()) {
    r.problem("'initial_condition.path' is required for kind from_file");
  }

  auto& integ = cfg.integrator;
  if (auto v = r.number("integrator.dt", true)) {
    if (!(*v > 0.0)) r.problem("'integrator.dt' must be positive");
    integ.dt = *v;
  }
  if (auto v = r.number("integrator.t_end", true)) {
    if (!(*v > 0.0)) r.problem("'integrator.t_end' must be positive");
    integ.t_end = *v;
  }
  integ.snapshot_every = r.number("integrator.snapshot_every", false).value_or(0.05);
  integ.check_every = r.number("integrator.check_every", false).value_or(0.01);
  integ.steady_tol = r.number("integrator.steady_tol", false).value_or(1e-6);
  if (integ.snapshot_every < integ.dt) r.problem("'integrator.snapshot_every' must be >= dt");
  if (integ.check_every < integ.dt) r.problem("'integrator.check_every' must be >= dt");
  if (integ.steady_tol < 0.0) r.problem("'integrator.steady_tol' must be non-negative");
  if (auto s = r.string("integrator.scheme", false)) {
    guarded(r, "integrator.scheme", [&] { integ.scheme = time_scheme_from_string(*s); });
  }
  if (auto s = r.string("integrator.monitors.positivity", false)) {
    guarded(r, "integrator.monitors.positivity",
            [&] { integ.monitors.positivity = monitor_mode_from_string(*s); });
  }
  if (auto s = r.string("integrator.monitors.mass", false)) {
    guarded(r, "integrator.monitors.mass", [&] { integ.monitors.mass = monitor_mode_from_string(*s); });
  }
  if (auto b = r.boolean("integrator.monitors.l2_growth")) integ.monitors.l2_growth = *b;

  if (auto d = r.string("output.directory", false)) cfg.output.directory = *d;
  if (auto f = r.string("output.format", false)) {
    guarded(r, "output.format", [&] { cfg.output.format = record_format_from_string(*f); });
  }
  if (auto e = r.boolean("output.emit_spectra")) cfg.output.emit_spectra = *e;

  if (!r.problems().empty()) throw ConfigError(std::move(r.problems()));
  return cfg;
}

nlohmann::json to_json(const SimulationConfig& cfg, std::optional<double> resolved_parameter) {
  json h = json::array();
  for (std::size_t i = 0; i < cfg.species; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < cfg.species; ++j) row.push_back(cfg.interaction[i * cfg.species + j]);
    h.push_back(row);
  }
  json kernel = {{"family", to_string(cfg.kernel.family)}};
  if (cfg.kernel.parameter) kernel["parameter"] = *cfg.kernel.parameter;
  if (cfg.kernel.sigma_target) kernel["sigma_target"] = *cfg.kernel.sigma_target;
  if (!cfg.kernel.file.empty()) kernel["file"] = cfg.kernel.file;
  if (cfg.kernel.analytic_spectrum) kernel["analytic_spectrum"] = true;
  if (resolved_parameter) kernel["resolved_parameter"] = *resolved_parameter;

  json ic = {{"kind", cfg.initial.kind == InitialKind::FromFile ? "from_file" : "perturbed_homogeneous"},
             {"means", cfg.initial.means},
             {"perturbation_amplitude", cfg.initial.perturbation_amplitude},
             {"perturbation_max_mode", cfg.initial.perturbation_max_mode},
             {"seed", cfg.initial.seed}};
  if (!cfg.initial.path.empty()) ic["path"] = cfg.initial.path;

  auto mode = [](MonitorMode m) {
    return m == MonitorMode::Off ? "off" : (m == MonitorMode::Warn ? "warn" : "strict");
  };
  const auto& integ = cfg.integrator;
  return json{{"grid", {{"M", cfg.points}, {"L", cfg.length}}},
              {"species", cfg.species},
              {"D", cfg.diffusion},
              {"H", h},
              {"kernel", kernel},
              {"dealias", cfg.dealias},
              {"initial_condition", ic},
              {"integrator",
               {{"dt", integ.dt},
                {"t_end", integ.t_end},
                {"snapshot_every", integ.snapshot_every},
                {"steady_tol", integ.steady_tol},
                {"check_every", integ.check_every},
                {"scheme", to_string(integ.scheme)},
                {"monitors",
                 {{"positivity", mode(integ.monitors.positivity)},
                  {"mass", mode(integ.monitors.mass)},
                  {"l2_growth", integ.monitors.l2_growth}}}}},
              {"output",
               {{"directory", cfg.output.directory},
                {"format", to_string(cfg.output.format)},
                {"emit_spectra", cfg.output.emit_spectra}}}};
}

Kernel build_kernel(const SimulationConfig& cfg) {
  const Grid grid = cfg.grid();
  const auto& k = cfg.kernel;
  if (k.family == KernelFamily::Custom) return load_custom_kernel(grid, k.file);
  const double p = k.parameter ? *k.parameter : solve_param_for_sigma(k.family, *k.sigma_target, grid);
  if (k.family == KernelFamily::TopHat) return top_hat(grid, p, k.analytic_spectrum);
  return von_mises(grid, p);
}

ModelParams build_params(const SimulationConfig& cfg) {
  ModelParams params(cfg.diffusion, InteractionMatrix(cfg.species, cfg.interaction), build_kernel(cfg));
  params.dealias = cfg.dealias;
  return params;
}

UniformSource::UniformSource(std::uint64_t seed) : engine_(seed) {}

double UniformSource::next() {
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * unit - 1.0;
}

State make_initial_condition(const SimulationConfig& cfg) {
  const Grid grid = cfg.grid();
  const auto& ic = cfg.initial;
  const std::size_t n = cfg.species;

  if (ic.kind == InitialKind::FromFile) {
    const auto record = read_record(ic.path);
    if (!(record.grid == grid) || record.species != n) {
      throw ConfigError({"'initial_condition.path' record does not match the configured grid and species"});
    }
    if (record.frames.empty()) throw ConfigError({"'initial_condition.path' record has no frames"});
    return State(SpeciesFields(grid, n, record.frames.back().values), 0.0);
  }

  SpeciesFields u(grid, n);
  UniformSource rng(ic.seed);
  const std::size_t m = grid.size();
  std::vector<double> deviation(m);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = ic.means[i];
    std::fill(deviation.begin(), deviation.end(), 0.0);
    for (int k = 1; k <= ic.perturbation_max_mode; ++k) {
      const double a = rng.next();
      const double b = rng.next();
      for (std::size_t x = 0; x < m; ++x) {
        const double phase = 2.0 * std::numbers::pi * k * static_cast<double>(x) / static_cast<double>(m);
        deviation[x] += a * std::cos(phase) + b * std::sin(phase);
      }
    }
    // Remove the rounding-level mean so the mass is exactly mean * L.
    double avg = 0.0;
    for (double d : deviation) avg += d;
    avg /= static_cast<double>(m);
    double lowest = 0.0;
    for (auto& d : deviation) {
      d = ic.perturbation_amplitude * mean * (d - avg);
      lowest = std::min(lowest, d);
    }
    const double floor = 1e-6 * mean;
    double scale = 1.0;
    if (mean + lowest < floor) {
      scale = (mean - floor) / (-lowest);
      if (scale < 0.99) {
        throw ConfigError({"'initial_condition.perturbation_amplitude' is too large: positivity would need "
                           "the perturbation scaled by " +
                           std::to_string(scale)});
      }
    }
    auto ui = u[i];
    for (std::size_t x = 0; x < m; ++x) ui[x] = mean + scale * deviation[x];
  }
  return State(std::move(u), 0.0);
}

}  // namespace aggspec
