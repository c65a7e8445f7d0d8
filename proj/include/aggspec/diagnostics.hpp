#ifndef AGGSPEC_DIAGNOSTICS_HPP
#define AGGSPEC_DIAGNOSTICS_HPP

/**
 * @file diagnostics.hpp
 * @brief Pattern classification, segregation and flatness measures, and the
 * linearized dispersion relation about the homogeneous state.
 *
 * Dispersion relation. Write u_i = ubar_i + eps_i(x, t) with ubar_i = p_i / L.
 * To first order the advection term becomes -ubar_i sum_j h_ij (K * eps_j)''.
 * For eps_j = c_j exp(i q x) this is +q^2 ubar_i h_ij Khat(q) c_j, and diffusion
 * contributes -q^2 D_i c_i, so dc/dt = A(q) c with
 *
 *   A(q) = -q^2 ( D - Khat(q) diag(ubar) H ),   q = 2 pi k / L,
 *
 * where Khat(q) = int K(x) exp(-i q x) dx is real for a symmetric kernel and
 * Khat(0) = 1. Attraction (h > 0) is destabilizing.
 */

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aggspec/integrator.hpp"
#include "aggspec/model.hpp"

namespace aggspec {

enum class Pattern { Homogeneous, StationaryPattern, Oscillatory };
std::string to_string(Pattern pattern);

struct PatternReport {
  Pattern classification = Pattern::Homogeneous;
  double steady_metric_final = 0.0;
  /// Largest non-DC Fourier amplitude of species 0 at the final time.
  long dominant_mode = 0;
  /// Species 0 vs 1; NaN for a single species.
  double segregation_index = 0.0;
  /// (max - min) / mean of the steady metric over the last quarter of the run.
  double oscillation_amplitude = 0.0;
  /// Least-squares slope of log(metric) over that window, and its one-sided p-value.
  double trend_slope = 0.0;
  double trend_p_value = 1.0;
};

struct ClassifyOptions {
  /// Non-DC amplitude, relative to the mean, below which a state is homogeneous.
  double homogeneous_tol = 1e-6;
  double window_fraction = 0.25;
  double amplitude_threshold = 0.10;
  double significance = 0.05;
};

class DiagnosticsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Needs at least 10 snapshots.
PatternReport classify(const RunResult& result, const ClassifyOptions& options = {});
PatternReport classify(const RunResult& result, double homogeneous_tol);

/// max_{h >= 1} |c_h| / |c_0| over all species.
double relative_nondc_amplitude(const SpeciesFields& u);

/// int u_i u_j dx / (p_i p_j / L).
double segregation_index(const State& state, std::size_t i, std::size_t j);

struct Flatness {
  double max_gradient = 0.0;
  double plateau_fraction = 1.0;
};

/// Spectral max |du_i/dx| and the fraction of points within 5% of the range below the maximum.
Flatness flatness_profile(const State& state, std::size_t i, double band = 0.05);

/// The matrix A(q) for integer mode k.
Eigen::MatrixXd linearized_operator(const ModelParams& params, std::span<const double> masses, long k);

struct DispersionResult {
  std::vector<std::complex<double>> growth_rates;
  /// True for k = 0: all rates vanish because mass is conserved.
  bool mass_mode = false;
  double max_real() const;
};

/// Eigenvalues of A(q); masses are p_i, the base state is p_i / L.
DispersionResult dispersion_relation(const ModelParams& params, std::span<const double> masses, long k);

/// Joint circular shift of b (in cells) maximizing the cross-correlation with a.
long best_alignment(const SpeciesFields& a, const SpeciesFields& b);

/// ||a - shift(b)||_{L2} / ||a||_{L2} at the best alignment.
double aligned_relative_l2(const SpeciesFields& a, const SpeciesFields& b);

/// One-line summary for the run report file.
std::string report_line(const std::string& run_id, const PatternReport& report);
std::string report_header();

}  // namespace aggspec

#endif  // AGGSPEC_DIAGNOSTICS_HPP
