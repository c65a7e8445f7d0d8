#ifndef AGGSPEC_TESTS_FIXTURES_HPP
#define AGGSPEC_TESTS_FIXTURES_HPP

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "aggspec/config.hpp"
#include "aggspec/model.hpp"

namespace fixtures {

inline aggspec::ModelParams repulsion_params(std::size_t m = 128, double a = 3.225) {
  const aggspec::Grid grid(m, 1.0);
  return aggspec::ModelParams({1.0, 1.0}, aggspec::InteractionMatrix(2, {0.0, -2.0, -2.0, 0.0}),
                              aggspec::von_mises(grid, a));
}

inline aggspec::ModelParams chase_params(std::size_t m = 128) {
  const aggspec::Grid grid(m, 1.0);
  return aggspec::ModelParams({1.0, 1.0}, aggspec::InteractionMatrix(2, {1.5, -1.0, 1.5, 1.5}),
                              aggspec::von_mises(grid, 3.1));
}

inline nlohmann::json repulsion_json(std::uint64_t seed = 1) {
  auto doc = nlohmann::json::parse(R"({
    "grid": {"M": 128, "L": 1.0},
    "species": 2,
    "D": [1.0, 1.0],
    "H": [[0.0, -2.0], [-2.0, 0.0]],
    "kernel": {"family": "vonmises", "parameter": 3.225},
    "initial_condition": {"means": [1.0, 1.0], "perturbation_amplitude": 0.01, "perturbation_max_mode": 8},
    "integrator": {"dt": 1e-4, "t_end": 10.0, "snapshot_every": 0.01, "check_every": 0.01},
    "output": {"directory": "out", "format": "binary"}
  })");
  doc["initial_condition"]["seed"] = seed;
  return doc;
}

// Smooth positive state with modes 1..modes of random amplitude.
inline aggspec::SpeciesFields smooth_state(const aggspec::Grid& grid, std::size_t n, int modes,
                                           std::uint64_t seed, double amplitude = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  aggspec::SpeciesFields u(grid, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> a(modes + 1), b(modes + 1);
    for (int k = 1; k <= modes; ++k) {
      a[k] = dist(rng);
      b[k] = dist(rng);
    }
    auto ui = u[i];
    for (std::size_t x = 0; x < grid.size(); ++x) {
      double s = 0.0;
      for (int k = 1; k <= modes; ++k) {
        const double ph = 2.0 * std::numbers::pi * k * grid.x(x) / grid.length();
        s += a[k] * std::cos(ph) + b[k] * std::sin(ph);
      }
      ui[x] = 1.0 + amplitude * s / modes;
    }
  }
  return u;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("aggspec_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures

#endif  // AGGSPEC_TESTS_FIXTURES_HPP
