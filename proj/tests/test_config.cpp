#include "doctest.h"

#include <cmath>
#include <fstream>

#include "aggspec/config.hpp"
#include "fixtures.hpp"

using namespace aggspec;

namespace {

bool mentions(const ConfigError& e, const std::string& key) {
  for (const auto& p : e.problems()) {
    if (p.find(key) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("cross-repulsion configuration parses to its parameters") {
  fixtures::TempDir dir("config");
  {
    std::ofstream f(dir.str("repulsion.json"));
    f << fixtures::repulsion_json().dump(2);
  }
  const SimulationConfig cfg = parse_config(dir.str("repulsion.json"));
  CHECK(cfg.species == 2);
  CHECK(cfg.points == 128);
  CHECK(cfg.diffusion == std::vector<double>{1.0, 1.0});
  CHECK(cfg.interaction == std::vector<double>{0.0, -2.0, -2.0, 0.0});
  CHECK(cfg.kernel.family == KernelFamily::VonMises);
  CHECK(*cfg.kernel.parameter == 3.225);
  CHECK(cfg.output.format == RecordFormat::Binary);
  const ModelParams params = build_params(cfg);
  CHECK(params.kernel.parameter() == 3.225);
  CHECK(params.interaction(0, 1) == -2.0);
}

TEST_CASE("sigma targets are resolved to family parameters") {
  auto doc = fixtures::repulsion_json();
  doc["kernel"] = {{"family", "tophat"}, {"sigma_target", 0.05}};
  const Kernel k = build_kernel(parse_config_json(doc));
  CHECK(k.family() == KernelFamily::TopHat);
  CHECK(std::abs(k.parameter() / 0.0866 - 1.0) < 0.01);
  doc["kernel"] = {{"family", "vonmises"}, {"sigma_target", 0.1}};
  CHECK(std::abs(build_kernel(parse_config_json(doc)).parameter() / 3.225 - 1.0) < 0.01);
}

TEST_CASE("dimension errors name the offending key") {
  auto doc = fixtures::repulsion_json();
  doc["H"] = {{0.0, 1.0, 2.0}, {1.0, 0.0, 2.0}};
  try {
    parse_config_json(doc);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "'H'"));
    CHECK(e.problems().size() == 1);
  }
}

TEST_CASE("all violations are reported together") {
  auto doc = fixtures::repulsion_json();
  doc["grid"]["M"] = 100;
  doc["D"] = {1.0, -1.0, 2.0};
  doc["integrator"]["dt"] = 0.0;
  doc["kernel"]["family"] = "gauss";
  doc["output"]["format"] = "xml";
  try {
    parse_config_json(doc);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "grid.M"));
    CHECK(mentions(e, "'D'"));
    CHECK(mentions(e, "D[1]"));
    CHECK(mentions(e, "integrator.dt"));
    CHECK(mentions(e, "kernel.family"));
    CHECK(mentions(e, "output.format"));
  }
  CHECK_THROWS_AS(parse_config_json(nlohmann::json::array()), ConfigError);
  auto both = fixtures::repulsion_json();
  both["kernel"]["sigma_target"] = 0.1;
  CHECK_THROWS_AS(parse_config_json(both), ConfigError);
  auto missing = fixtures::repulsion_json();
  missing.erase("species");
  CHECK_THROWS_AS(parse_config_json(missing), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("canonical JSON reparses to the same configuration") {
  auto cfg = parse_config_json(fixtures::repulsion_json(9));
  cfg.integrator.scheme = TimeScheme::Classical;
  cfg.integrator.monitors.mass = MonitorMode::Strict;
  const auto again = parse_config_json(to_json(cfg, 3.5));
  CHECK(to_json(again) == to_json(cfg));
  CHECK(to_json(cfg, 3.5)["kernel"]["resolved_parameter"] == 3.5);
}

TEST_CASE("initial conditions are deterministic, positive and carry the requested mass") {
  auto doc = fixtures::repulsion_json(5);
  doc["initial_condition"]["means"] = {0.5, 2.0};
  const auto cfg = parse_config_json(doc);
  const State a = make_initial_condition(cfg);
  const State b = make_initial_condition(cfg);
  CHECK(a.densities().data() == b.densities().data());
  const auto masses = total_mass(a);
  CHECK(masses[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(masses[1] == doctest::Approx(2.0).epsilon(1e-15));
  for (double v : a.densities().data()) CHECK(v > 0.0);
  double dev = 0.0;
  for (double v : a[0]) dev = std::max(dev, std::abs(v / 0.5 - 1.0));
  CHECK(dev > 1e-3);
  CHECK(dev < 0.01 * 2 * 8);

  doc["initial_condition"]["seed"] = 6;
  CHECK(make_initial_condition(parse_config_json(doc)).densities().data() != a.densities().data());
}

TEST_CASE("perturbation stays within the requested band") {
  auto doc = fixtures::repulsion_json(2);
  doc["initial_condition"]["perturbation_max_mode"] = 3;
  const State s = make_initial_condition(parse_config_json(doc));
  const auto hat = forward(s.densities().field(1));
  for (std::size_t h = 4; h < hat.coeffs().size(); ++h) CHECK(std::abs(hat[h]) < 1e-15);
  CHECK(std::abs(hat[3]) > 1e-5);
}

TEST_CASE("oversized perturbations are a configuration error") {
  auto doc = fixtures::repulsion_json(1);
  doc["initial_condition"]["perturbation_amplitude"] = 5.0;
  CHECK_THROWS_AS(make_initial_condition(parse_config_json(doc)), ConfigError);
  doc["initial_condition"]["perturbation_amplitude"] = 0.0;
  const State flat = make_initial_condition(parse_config_json(doc));
  for (double v : flat.densities().data()) CHECK(v == 1.0);
}

TEST_CASE("initial condition can continue from the last frame of a record") {
  fixtures::TempDir dir("config_ic");
  SimulationRecord rec(Grid(128, 1.0), 2);
  rec.frames.push_back({0.0, std::vector<double>(256, 1.0)});
  rec.frames.push_back({1.0, std::vector<double>(256, 2.0)});
  write_record(rec, dir.str("prev.bin"), RecordFormat::Binary);
  auto doc = fixtures::repulsion_json();
  doc["initial_condition"] = {{"kind", "from_file"}, {"path", dir.str("prev.bin")}};
  const State s = make_initial_condition(parse_config_json(doc));
  CHECK(s.densities().data() == std::vector<double>(256, 2.0));
  doc["grid"]["M"] = 64;
  CHECK_THROWS_AS(make_initial_condition(parse_config_json(doc)), ConfigError);
  doc["initial_condition"].erase("path");
  CHECK_THROWS_AS(parse_config_json(doc), ConfigError);
}

TEST_CASE("uniform source uses the top 53 bits of the standard 64-bit Mersenne Twister") {
  // First output of mt19937_64 with its default seed 5489.
  const std::uint64_t first = 14514284786278117030ull;
  UniformSource src(5489);
  CHECK(src.next() == static_cast<double>(first >> 11) * 0x1.0p-53 * 2.0 - 1.0);
  UniformSource many(1);
  for (int k = 0; k < 10000; ++k) {
    const double v = many.next();
    CHECK(v >= -1.0);
    CHECK(v < 1.0);
  }
}
