#ifndef AGGSPEC_CONFIG_HPP
#define AGGSPEC_CONFIG_HPP

/**
 * @file config.hpp
 * @brief JSON simulation configuration and initial-condition generation.
 *
 * Schema (keys not marked required have the defaults shown):
 *
 * @code
 * {
 *   "grid":    { "M": 128, "L": 1.0 },                        // required
 *   "species": 2,                                             // required
 *   "D":       [1.0, 1.0],                                    // required, length N
 *   "H":       [[0.0, -2.0], [-2.0, 0.0]],                    // required, N rows of N
 *   "kernel":  { "family": "vonmises",                        // vonmises|tophat|custom
 *                "parameter": 3.225,                          // a or gamma, or ...
 *                "sigma_target": 0.1,                         // ... exactly one of these
 *                "file": "kernel.txt",                        // custom only
 *                "analytic_spectrum": false },                // tophat only
 *   "dealias": false,
 *   "initial_condition": {
 *     "kind": "perturbed_homogeneous",                        // or "from_file"
 *     "means": [1.0, 1.0],                                    // p_i / L
 *     "perturbation_amplitude": 0.01,                         // relative to each mean
 *     "perturbation_max_mode": 8,
 *     "seed": 42,
 *     "path": "previous/record.bin" },                        // from_file: last frame
 *   "integrator": { "dt": 1e-4, "t_end": 10.0, "snapshot_every": 0.05,
 *                   "steady_tol": 1e-6, "check_every": 0.01,
 *                   "scheme": "integrating_factor",           // or "classical"
 *                   "monitors": { "positivity": "warn", "mass": "warn",
 *                                 "l2_growth": true } },
 *   "output": { "directory": "out", "format": "csv", "emit_spectra": false }
 * }
 * @endcode
 */

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "aggspec/integrator.hpp"
#include "aggspec/kernels.hpp"
#include "aggspec/model.hpp"
#include "aggspec/record.hpp"

namespace aggspec {

/// All violations found while validating a configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct KernelSpec {
  KernelFamily family = KernelFamily::VonMises;
  std::optional<double> parameter;
  std::optional<double> sigma_target;
  std::string file;
  bool analytic_spectrum = false;
};

enum class InitialKind { PerturbedHomogeneous, FromFile };

struct InitialConditionSpec {
  InitialKind kind = InitialKind::PerturbedHomogeneous;
  std::vector<double> means;
  double perturbation_amplitude = 0.01;
  int perturbation_max_mode = 8;
  std::uint64_t seed = 42;
  std::string path;
};

struct OutputSpec {
  std::string directory = "out";
  RecordFormat format = RecordFormat::Csv;
  bool emit_spectra = false;
};

struct SimulationConfig {
  std::size_t points = 128;
  double length = 1.0;
  std::size_t species = 0;
  std::vector<double> diffusion;
  std::vector<double> interaction;  // row-major N*N
  KernelSpec kernel;
  bool dealias = false;
  InitialConditionSpec initial;
  IntegratorConfig integrator;
  OutputSpec output;

  Grid grid() const { return Grid(points, length); }
};

SimulationConfig parse_config_json(const nlohmann::json& doc);
SimulationConfig parse_config(const std::string& path);
nlohmann::json load_json(const std::string& path);

/// Canonical JSON form, with the resolved kernel parameter when known.
nlohmann::json to_json(const SimulationConfig& cfg, std::optional<double> resolved_parameter = {});

/// Kernel described by the config; sigma targets are solved for the parameter.
Kernel build_kernel(const SimulationConfig& cfg);
ModelParams build_params(const SimulationConfig& cfg);

/**
 * u_i = m_i (1 + A sum_{k=1}^{K} (a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L))),
 * a_k, b_k uniform in [-1, 1] drawn species by species, k ascending, a before b.
 * If any value falls below 1e-6 m_i the deviation is scaled down to lift the
 * minimum to that floor; mass is unaffected. Needing to scale by more than 1%
 * is a configuration error.
 */
State make_initial_condition(const SimulationConfig& cfg);

/// Uniform double in [-1, 1) from the top 53 bits of a 64-bit Mersenne Twister draw.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed);
  double next();

 private:
  std::mt19937_64 engine_;
};

}  // namespace aggspec

#endif  // AGGSPEC_CONFIG_HPP
