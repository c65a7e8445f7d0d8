#include "aggspec/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace aggspec {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per size under a lock and never destroyed before exit.
struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

const PlanPair& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<PlanPair>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;

  std::vector<double> real(n);
  std::vector<fftw_complex> cplx(n / 2 + 1);
  auto pair = std::make_unique<PlanPair>();
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  pair->r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), cplx.data(), flags);
  pair->c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx.data(), real.data(),
                                   flags | FFTW_DESTROY_INPUT);
  auto [pos, inserted] = cache.emplace(n, std::move(pair));
  return *pos->second;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": operands live on different grids");
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Grid::Grid(std::size_t points, double length) : points_(points), length_(length) {
  if (!is_power_of_two(points_) || points_ < 2) {
    throw ConfigurationError("grid size M must be a power of 2 (>= 2), got " +
                             std::to_string(points_));
  }
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw ConfigurationError("domain length L must be positive and finite");
  }
}

double Grid::centered_x(std::size_t m) const {
  return m < points_ / 2 ? x(m) : x(m) - length_;
}

long Grid::signed_mode(std::size_t h) const {
  return h <= points_ / 2 ? static_cast<long>(h) : static_cast<long>(h) - static_cast<long>(points_);
}

double Grid::wavenumber(std::size_t h) const {
  return 2.0 * std::numbers::pi * static_cast<double>(h) / length_;
}

Field::Field(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ConfigurationError("field has " + std::to_string(values_.size()) +
                             " samples, grid has " + std::to_string(grid_.size()));
  }
}

SpectralField::SpectralField(Grid grid) : grid_(grid), coeffs_(grid.spectrum_size()) {}

SpectralField::SpectralField(Grid grid, std::vector<Complex> half_spectrum)
    : grid_(grid), coeffs_(std::move(half_spectrum)) {
  if (coeffs_.size() != grid_.spectrum_size()) {
    throw ConfigurationError("half spectrum must hold M/2+1 coefficients");
  }
}

Complex SpectralField::mode(std::size_t h) const {
  const std::size_t m = grid_.size();
  h %= m;
  return h <= m / 2 ? coeffs_[h] : std::conj(coeffs_[m - h]);
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_grid(grid_, other.grid_, "SpectralField::operator+=");
  for (std::size_t h = 0; h < coeffs_.size(); ++h) coeffs_[h] += other.coeffs_[h];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

void forward(const Grid& grid, std::span<const double> values, std::span<Complex> half_spectrum) {
  const std::size_t n = grid.size();
  if (values.size() != n || half_spectrum.size() != n / 2 + 1) {
    throw ConfigurationError("forward: buffer sizes do not match the grid");
  }
  const auto& p = plans_for(n);
  // r2c never writes its input.
  fftw_execute_dft_r2c(p.r2c, const_cast<double*>(values.data()),
                       reinterpret_cast<fftw_complex*>(half_spectrum.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& c : half_spectrum) c *= scale;
}

void inverse(const Grid& grid, std::span<const Complex> half_spectrum, std::span<double> values) {
  const std::size_t n = grid.size();
  if (values.size() != n || half_spectrum.size() != n / 2 + 1) {
    throw ConfigurationError("inverse: buffer sizes do not match the grid");
  }
  const auto& p = plans_for(n);
  thread_local std::vector<Complex> scratch;
  scratch.assign(half_spectrum.begin(), half_spectrum.end());
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()), values.data());
}

SpectralField forward(const Field& f) {
  SpectralField out(f.grid());
  forward(f.grid(), f.values(), out.coeffs());
  return out;
}

Field inverse(const SpectralField& spectrum) {
  Field out(spectrum.grid());
  inverse(spectrum.grid(), spectrum.coeffs(), out.values());
  return out;
}

SpectralField spectral_derivative(const SpectralField& spectrum) {
  const Grid& g = spectrum.grid();
  SpectralField out(g);
  const std::size_t nyquist = g.size() / 2;
  for (std::size_t h = 0; h < nyquist; ++h) {
    out[h] = Complex(0.0, g.wavenumber(h)) * spectrum[h];
  }
  out[nyquist] = 0.0;
  return out;
}

SpectralField spectral_second_derivative(const SpectralField& spectrum) {
  const Grid& g = spectrum.grid();
  SpectralField out(g);
  for (std::size_t h = 0; h < g.spectrum_size(); ++h) {
    const double q = g.wavenumber(h);
    out[h] = -q * q * spectrum[h];
  }
  return out;
}

SpectralField spectral_convolve(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f.grid(), g.grid(), "spectral_convolve");
  SpectralField out(f.grid());
  const double length = f.grid().length();
  for (std::size_t h = 0; h < out.coeffs().size(); ++h) out[h] = length * f[h] * g[h];
  return out;
}

void dealias_two_thirds(std::span<Complex> half_spectrum) {
  const std::size_t m = 2 * (half_spectrum.size() - 1);
  const std::size_t cutoff = m / 3;
  for (std::size_t h = cutoff + 1; h < half_spectrum.size(); ++h) half_spectrum[h] = 0.0;
}

double integrate(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().dx();
}

double l2_norm(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum * f.grid().dx());
}

double linf_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace aggspec
