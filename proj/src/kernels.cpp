#include "aggspec/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

namespace aggspec {

namespace {

constexpr double kSeriesCutoff = 15.0;

double log_i0_series(double a) {
  // I_0(a) = sum_k (a^2/4)^k / (k!)^2
  const double y = 0.25 * a * a;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= y / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::log(sum);
}

double log_i0_asymptotic(double a) {
  // I_0(a) ~ e^a / sqrt(2 pi a) * sum_k ((2k-1)!!)^2 / (k! (8a)^k), truncated at
  // the smallest term.
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * odd * odd / (static_cast<double>(k) * 8.0 * a);
    if (next > term) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return a - 0.5 * std::log(2.0 * std::numbers::pi * a) + std::log(sum);
}

// Length of [lo, hi] intersected with [-g, g], including the periodic images at +-L.
double covered_length(double lo, double hi, double gamma, double length) {
  double total = 0.0;
  for (int image = -1; image <= 1; ++image) {
    const double shift = image * length;
    const double a = std::max(lo, -gamma + shift);
    const double b = std::min(hi, gamma + shift);
    if (b > a) total += b - a;
  }
  return total;
}

void normalize_in_place(Field& f) {
  const double mass = integrate(f);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ConfigurationError("kernel samples do not have a positive finite integral");
  }
  for (double& v : f.values()) v /= mass;
}

double first_moment(const Field& samples) {
  const Grid& g = samples.grid();
  const std::size_t m = g.size();
  double sum = 0.0;
  // Point M/2 sits on both ends of [-L/2, L/2]; its two half weights cancel.
  for (std::size_t i = 0; i < m; ++i) {
    if (i == m / 2) continue;
    sum += g.centered_x(i) * samples[i];
  }
  return sum * g.dx();
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::VonMises: return "vonmises";
    case KernelFamily::TopHat: return "tophat";
    case KernelFamily::Custom: return "custom";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  std::string lower;
  for (char c : name) {
    if (c == '_' || c == '-') continue;
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "vonmises") return KernelFamily::VonMises;
  if (lower == "tophat") return KernelFamily::TopHat;
  if (lower == "custom") return KernelFamily::Custom;
  throw ConfigurationError("unknown kernel family '" + name + "' (expected vonmises|tophat|custom)");
}

double log_bessel_i0(double a) {
  if (a < 0.0) a = -a;
  return a < kSeriesCutoff ? log_i0_series(a) : log_i0_asymptotic(a);
}

double bessel_i0(double a) { return std::exp(log_bessel_i0(a)); }

Kernel::Kernel(Field samples, SpectralField spectrum, KernelFamily family, double parameter)
    : samples_(std::move(samples)),
      spectrum_(std::move(spectrum)),
      family_(family),
      parameter_(parameter) {
  sigma_ = kernel_sigma(samples_);
}

double Kernel::transform_at(std::size_t h) const {
  return grid().length() * spectrum_.mode(h).real();
}

Kernel von_mises(const Grid& grid, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw ConfigurationError("von Mises concentration a must be positive, got " + std::to_string(a));
  }
  const double log_norm = log_bessel_i0(a) + std::log(grid.length());
  Field samples(grid);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double phase = 2.0 * std::numbers::pi * grid.x(m) / grid.length();
    samples[m] = std::exp(a * std::cos(phase) - log_norm);
  }
  normalize_in_place(samples);
  auto spectrum = forward(samples);
  return Kernel(std::move(samples), std::move(spectrum), KernelFamily::VonMises, a);
}

Kernel top_hat(const Grid& grid, double gamma, bool analytic_spectrum) {
  const double length = grid.length();
  if (!(gamma > 0.0) || !(gamma < 0.5 * length)) {
    throw ConfigurationError("top-hat half width gamma must lie in (0, " +
                             std::to_string(0.5 * length) + "), got " + std::to_string(gamma));
  }
  const double dx = grid.dx();
  const double height = 1.0 / (2.0 * gamma);
  Field samples(grid);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double centre = grid.centered_x(m);
    samples[m] = height * covered_length(centre - 0.5 * dx, centre + 0.5 * dx, gamma, length) / dx;
  }
  // Cells tile [-L/2 - dx/2, L/2 - dx/2) exactly, so this only removes rounding.
  normalize_in_place(samples);

  SpectralField spectrum(grid);
  if (analytic_spectrum) {
    spectrum[0] = 1.0 / length;
    for (std::size_t h = 1; h < grid.spectrum_size(); ++h) {
      const double qg = grid.wavenumber(h) * gamma;
      spectrum[h] = std::sin(qg) / qg / length;
    }
  } else {
    spectrum = forward(samples);
  }
  return Kernel(std::move(samples), std::move(spectrum), KernelFamily::TopHat, gamma);
}

Kernel custom_kernel(Field samples) {
  for (double v : samples.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigurationError("custom kernel samples must be finite and non-negative");
    }
  }
  normalize_in_place(samples);
  const double mean = first_moment(samples);
  if (std::abs(mean) > 1e-8 * samples.grid().length()) {
    throw ConfigurationError("custom kernel has nonzero first moment " + std::to_string(mean) +
                             "; only symmetric kernels centred at index 0 are supported");
  }
  auto spectrum = forward(samples);
  return Kernel(std::move(samples), std::move(spectrum), KernelFamily::Custom,
                std::numeric_limits<double>::quiet_NaN());
}

Kernel load_custom_kernel(const Grid& grid, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open kernel file '" + path + "'");
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    try {
      values.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigurationError("kernel file '" + path + "': not a number: '" + token + "'");
    }
  }
  if (values.size() != grid.size()) {
    throw ConfigurationError("kernel file '" + path + "' holds " + std::to_string(values.size()) +
                             " samples, grid needs " + std::to_string(grid.size()));
  }
  return custom_kernel(Field(grid, std::move(values)));
}

double kernel_sigma(const Field& samples) {
  const Grid& g = samples.grid();
  double second = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double x = g.centered_x(m);
    second += x * x * samples[m];
  }
  second *= g.dx();
  const double first = first_moment(samples);
  double variance = second - first * first;
  if (variance < 0.0) {
    std::cerr << "warning: kernel variance " << variance << " negative from rounding, clamped to 0\n";
    variance = 0.0;
  }
  return std::sqrt(variance);
}

double kernel_sigma(const Kernel& k) { return kernel_sigma(k.samples()); }

Kernel make_kernel(KernelFamily family, const Grid& grid, double parameter) {
  switch (family) {
    case KernelFamily::VonMises: return von_mises(grid, parameter);
    case KernelFamily::TopHat: return top_hat(grid, parameter);
    case KernelFamily::Custom: break;
  }
  throw ConfigurationError("custom kernels have no parameter; load them from a file");
}

double solve_param_for_sigma(KernelFamily family, double sigma_target, const Grid& grid) {
  if (family == KernelFamily::Custom) {
    throw ConfigurationError("sigma matching is only defined for vonmises and tophat kernels");
  }
  // Work in log(a) for von Mises (sigma decreasing), linear gamma for top hat
  // (sigma increasing). Below gamma = dx/2 every top hat is a single cell.
  const bool log_scale = family == KernelFamily::VonMises;
  const double lo = log_scale ? std::log(1e-6) : 0.5 * grid.dx();
  const double hi = log_scale ? std::log(1e5) : 0.5 * grid.length() * (1.0 - 1e-9);
  auto param = [&](double s) { return log_scale ? std::exp(s) : s; };
  auto sigma_at = [&](double s) { return kernel_sigma(make_kernel(family, grid, param(s))); };

  constexpr int kLadder = 40;
  std::vector<double> ladder(kLadder + 1);
  for (int i = 0; i <= kLadder; ++i) ladder[i] = sigma_at(lo + (hi - lo) * i / kLadder);
  const double sign = log_scale ? -1.0 : 1.0;
  for (int i = 0; i < kLadder; ++i) {
    if (!(sign * (ladder[i + 1] - ladder[i]) > 0.0)) {
      throw std::logic_error("kernel_sigma is not monotone over the " + to_string(family) +
                             " search bracket");
    }
  }
  const double sigma_min = std::min(ladder.front(), ladder.back());
  const double sigma_max = std::max(ladder.front(), ladder.back());
  if (!(sigma_target > sigma_min && sigma_target < sigma_max)) {
    std::ostringstream msg;
    msg << "sigma " << sigma_target << " not attainable by " << to_string(family)
        << " on this grid; valid interval is (" << sigma_min << ", " << sigma_max << ")";
    throw ConfigurationError(msg.str());
  }

  double a = lo;
  double b = hi;
  double mid = 0.5 * (a + b);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (a + b);
    const double err = sigma_at(mid) - sigma_target;
    if (std::abs(err) <= 1e-9 * sigma_target) break;
    // Moving up in s raises sigma for top hat, lowers it for von Mises.
    if (sign * err > 0.0) {
      b = mid;
    } else {
      a = mid;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
  }
  return param(mid);
}

}  // namespace aggspec
