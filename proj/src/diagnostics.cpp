#include "aggspec/diagnostics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace aggspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Trend {
  double slope = 0.0;
  double p_value = 1.0;  // H1: slope < 0
};

// Ordinary least squares on (t, y) with the standard error inflated for lag-1
// autocorrelation of the residuals (n_eff = n (1 - r) / (1 + r)).
Trend decreasing_trend(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  Trend out;
  if (n < 3) return out;
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (t[k] - tm) * (t[k] - tm);
    sxy += (t[k] - tm) * (y[k] - ym);
  }
  if (sxx <= 0.0) return out;
  out.slope = sxy / sxx;
  const double intercept = ym - out.slope * tm;

  std::vector<double> r(n);
  double sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    r[k] = y[k] - (intercept + out.slope * t[k]);
    sse += r[k] * r[k];
  }
  if (sse <= 0.0) {
    out.p_value = out.slope < 0.0 ? 0.0 : 1.0;
    return out;
  }
  double c0 = 0.0;
  double c1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) c0 += r[k] * r[k];
  for (std::size_t k = 1; k < n; ++k) c1 += r[k] * r[k - 1];
  const double rho = std::clamp(c1 / c0, 0.0, 0.999999);
  const double n_eff = static_cast<double>(n) * (1.0 - rho) / (1.0 + rho);
  const double dof = n_eff - 2.0;
  if (dof < 1.0) return out;  // too little independent information to call a trend

  const double se = std::sqrt(sse / (static_cast<double>(n) - 2.0) / sxx) *
                    std::sqrt((static_cast<double>(n) - 2.0) / dof);
  const double tstat = out.slope / se;
  boost::math::students_t dist(dof);
  out.p_value = boost::math::cdf(dist, tstat);
  return out;
}

std::vector<Complex> half_spectrum(const Grid& grid, std::span<const double> values) {
  std::vector<Complex> hat(grid.spectrum_size());
  forward(grid, values, hat);
  return hat;
}

}  // namespace

std::string to_string(Pattern pattern) {
  switch (pattern) {
    case Pattern::Homogeneous: return "Homogeneous";
    case Pattern::StationaryPattern: return "StationaryPattern";
    case Pattern::Oscillatory: return "Oscillatory";
  }
  return "Unknown";
}

double relative_nondc_amplitude(const SpeciesFields& u) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.species(); ++i) {
    const auto hat = half_spectrum(u.grid(), u[i]);
    const double mean = std::abs(hat[0]);
    double top = 0.0;
    for (std::size_t h = 1; h < hat.size(); ++h) top = std::max(top, std::abs(hat[h]));
    worst = std::max(worst, mean > 0.0 ? top / mean : std::numeric_limits<double>::infinity());
  }
  return worst;
}

PatternReport classify(const RunResult& result, double homogeneous_tol) {
  ClassifyOptions options;
  options.homogeneous_tol = homogeneous_tol;
  return classify(result, options);
}

PatternReport classify(const RunResult& result, const ClassifyOptions& options) {
  const auto& record = result.snapshots;
  if (record.frames.size() < 10) {
    throw DiagnosticsError("classify needs at least 10 snapshots, record has " +
                           std::to_string(record.frames.size()));
  }
  const SpeciesFields& u = result.final_state.densities();

  PatternReport report;
  const auto hat = half_spectrum(u.grid(), u[0]);
  double best = -1.0;
  for (std::size_t h = 1; h < hat.size(); ++h) {
    if (std::abs(hat[h]) > best) {
      best = std::abs(hat[h]);
      report.dominant_mode = static_cast<long>(h);
    }
  }
  report.segregation_index = u.species() >= 2 ? segregation_index(result.final_state, 0, 1) : kNaN;

  std::vector<double> times;
  std::vector<double> metric;
  for (const auto& d : record.diagnostics) {
    if (std::isfinite(d.steady_metric)) {
      times.push_back(d.t);
      metric.push_back(d.steady_metric);
    }
  }
  report.steady_metric_final = metric.empty() ? kNaN : metric.back();

  if (!times.empty()) {
    const double t_first = record.diagnostics.front().t;
    const double t_last = times.back();
    const double t_start = t_last - options.window_fraction * (t_last - t_first);
    std::vector<double> wt;
    std::vector<double> wlog;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k] < t_start) continue;
      wt.push_back(times[k]);
      wlog.push_back(std::log(std::max(metric[k], 1e-300)));
      lo = std::min(lo, metric[k]);
      hi = std::max(hi, metric[k]);
      sum += metric[k];
    }
    if (!wt.empty()) {
      const double mean = sum / static_cast<double>(wt.size());
      report.oscillation_amplitude = mean > 0.0 ? (hi - lo) / mean : 0.0;
      const Trend trend = decreasing_trend(wt, wlog);
      report.trend_slope = trend.slope;
      report.trend_p_value = trend.p_value;
    }
  }

  if (relative_nondc_amplitude(u) < options.homogeneous_tol) {
    report.classification = Pattern::Homogeneous;
  } else if (result.outcome == Outcome::TimedOut &&
             report.oscillation_amplitude > options.amplitude_threshold &&
             !(report.trend_p_value < options.significance && report.trend_slope < 0.0)) {
    report.classification = Pattern::Oscillatory;
  } else {
    report.classification = Pattern::StationaryPattern;
  }
  return report;
}

double segregation_index(const State& state, std::size_t i, std::size_t j) {
  if (i == j) throw DiagnosticsError("segregation_index needs two distinct species");
  if (i >= state.species() || j >= state.species()) {
    throw DiagnosticsError("segregation_index: species index out of range");
  }
  const auto masses = total_mass(state);
  if (masses[i] == 0.0 || masses[j] == 0.0) {
    throw DiagnosticsError("segregation_index: species has zero mass");
  }
  const Grid& g = state.grid();
  double overlap = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) overlap += state[i][m] * state[j][m];
  overlap *= g.dx();
  return overlap / (masses[i] * masses[j] / g.length());
}

Flatness flatness_profile(const State& state, std::size_t i, double band) {
  const auto ui = state[i];
  const auto [lo_it, hi_it] = std::minmax_element(ui.begin(), ui.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Flatness out;
  if (hi - lo <= 0.0) return out;

  const auto derivative = inverse(spectral_derivative(forward(state.densities().field(i))));
  out.max_gradient = linf_norm(derivative.values());
  std::size_t count = 0;
  for (double v : ui) {
    if (std::abs(v - hi) < band * (hi - lo)) ++count;
  }
  out.plateau_fraction = static_cast<double>(count) / static_cast<double>(ui.size());
  return out;
}

Eigen::MatrixXd linearized_operator(const ModelParams& params, std::span<const double> masses,
                                    long k) {
  const std::size_t n = params.species();
  if (masses.size() != n) throw DiagnosticsError("dispersion_relation: one mass per species required");
  const Grid& g = params.grid();
  const std::size_t mode = static_cast<std::size_t>(std::labs(k)) % g.size();
  const double q = 2.0 * std::numbers::pi * static_cast<double>(k) / g.length();
  const double khat = params.kernel.transform_at(mode);
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ubar = masses[i] / g.length();
    for (std::size_t j = 0; j < n; ++j) {
      const double d = i == j ? params.diffusion[i] : 0.0;
      a(i, j) = -q * q * (d - khat * ubar * params.interaction(i, j));
    }
  }
  return a;
}

double DispersionResult::max_real() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z : growth_rates) best = std::max(best, z.real());
  return best;
}

DispersionResult dispersion_relation(const ModelParams& params, std::span<const double> masses,
                                     long k) {
  DispersionResult out;
  out.mass_mode = k == 0;
  if (out.mass_mode) {
    out.growth_rates.assign(params.species(), {0.0, 0.0});
    return out;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(linearized_operator(params, masses, k), false);
  const auto& ev = solver.eigenvalues();
  for (Eigen::Index r = 0; r < ev.size(); ++r) out.growth_rates.push_back(ev[r]);
  std::sort(out.growth_rates.begin(), out.growth_rates.end(),
            [](const auto& a, const auto& b) { return a.real() > b.real(); });
  return out;
}

long best_alignment(const SpeciesFields& a, const SpeciesFields& b) {
  if (!(a.grid() == b.grid()) || a.species() != b.species()) {
    throw GridMismatch("best_alignment: fields differ in shape");
  }
  const long m = static_cast<long>(a.points());
  long best_shift = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (long s = 0; s < m; ++s) {
    double corr = 0.0;
    for (std::size_t i = 0; i < a.species(); ++i) {
      for (long x = 0; x < m; ++x) corr += a[i][x] * b[i][((x - s) % m + m) % m];
    }
    if (corr > best) {
      best = corr;
      best_shift = s;
    }
  }
  return best_shift;
}

double aligned_relative_l2(const SpeciesFields& a, const SpeciesFields& b) {
  const auto shifted = shift_cells(b, best_alignment(a, b));
  return l2_distance(a, shifted) / l2_norm(a);
}

std::string report_header() {
  return "run_id\tclassification\tdominant_mode\tsegregation_index\tsteady_metric_final";
}

std::string report_line(const std::string& run_id, const PatternReport& report) {
  std::ostringstream out;
  out << std::setprecision(17) << run_id << '\t' << to_string(report.classification) << '\t'
      << report.dominant_mode << '\t' << report.segregation_index << '\t'
      << report.steady_metric_final;
  return out.str();
}

}  // namespace aggspec
