#ifndef AGGSPEC_SPECTRAL_HPP
#define AGGSPEC_SPECTRAL_HPP

/**
 * @file spectral.hpp
 * @brief Periodic 1D fields and their Fourier-space primitives.
 *
 * Conventions used throughout the library:
 *
 *   forward:  c_h = (1/M) * sum_m u_m exp(-2 pi i h m / M)
 *   inverse:  u_m = sum_h c_h exp(+2 pi i h m / M)
 *
 * so c_0 is the mean of the samples and the coefficients approximate the
 * continuous ones, (1/L) * int_0^L u(x) exp(-2 pi i h x / L) dx.
 *
 * Parseval under this convention:
 *
 *   (1/M) * sum_m |u_m|^2 = sum_{h=0}^{M-1} |c_h|^2
 *
 * Convolution scaling. The continuous periodic convolution
 * (f*g)(x) = int_0^L f(x-y) g(y) dy has Fourier coefficients
 * (1/L) int (f*g) e^{-iqx} dx = (1/L) int int f(x-y) e^{-iq(x-y)} g(y) e^{-iqy}
 * = L * f_h * g_h. The discrete analogue holds exactly: the coefficients of
 * dx * sum_n f_{m-n} g_n are (1/M) * M * dx * M * F_h G_h / M = L * F_h * G_h.
 * spectral_convolve therefore multiplies by L, and with that factor it equals
 * periodic trapezoid quadrature to rounding.
 *
 * Only the non-negative half of the spectrum (h = 0..M/2) is stored; the
 * coefficient at -h (equivalently M-h) is the conjugate of the one at h.
 */

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace aggspec {

using Complex = std::complex<double>;

/// Thrown for invalid grids, kernels and parameter combinations.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when operands live on different grids.
class GridMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

bool is_power_of_two(std::size_t n);

/// Uniform periodic grid x_m = m * dx on [0, L).
class Grid {
 public:
  Grid(std::size_t points, double length);

  std::size_t size() const { return points_; }
  double length() const { return length_; }
  double dx() const { return length_ / static_cast<double>(points_); }
  double x(std::size_t m) const { return static_cast<double>(m) * dx(); }

  /// Position of grid point m in [-L/2, L/2), i.e. signed periodic offset from 0.
  double centered_x(std::size_t m) const;

  /// Signed wavenumber index for storage index h: h for h <= M/2, h - M above.
  long signed_mode(std::size_t h) const;

  /// Angular wavenumber 2 pi h / L for a non-negative mode index.
  double wavenumber(std::size_t h) const;

  std::size_t spectrum_size() const { return points_ / 2 + 1; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.points_ == b.points_ && a.length_ == b.length_;
  }

 private:
  std::size_t points_;
  double length_;
};

/// Real samples of a periodic function on a Grid.
class Field {
 public:
  explicit Field(Grid grid);
  Field(Grid grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t m) { return values_[m]; }
  double operator[](std::size_t m) const { return values_[m]; }

  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Half-spectrum (modes 0..M/2) of a real field.
class SpectralField {
 public:
  explicit SpectralField(Grid grid);
  SpectralField(Grid grid, std::vector<Complex> half_spectrum);

  const Grid& grid() const { return grid_; }

  /// Stored coefficients, modes 0..M/2.
  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  Complex& operator[](std::size_t h) { return coeffs_[h]; }
  Complex operator[](std::size_t h) const { return coeffs_[h]; }

  /// Coefficient at any storage index 0..M-1, using conjugate symmetry above M/2.
  Complex mode(std::size_t h) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

SpectralField forward(const Field& f);
Field inverse(const SpectralField& spectrum);

/// Raw-buffer variants used by the hot loops; sizes must be M and M/2+1.
void forward(const Grid& grid, std::span<const double> values, std::span<Complex> half_spectrum);
void inverse(const Grid& grid, std::span<const Complex> half_spectrum, std::span<double> values);

/// d/dx in Fourier space; the Nyquist coefficient is set to zero.
SpectralField spectral_derivative(const SpectralField& spectrum);

/// d^2/dx^2 in Fourier space; the Nyquist mode is kept (even derivative).
SpectralField spectral_second_derivative(const SpectralField& spectrum);

/// Spectrum of the periodic convolution int_0^L f(x-y) g(y) dy.
SpectralField spectral_convolve(const SpectralField& f, const SpectralField& g);

/// Zero all modes with |h| > M/3 (2/3-rule truncation).
void dealias_two_thirds(std::span<Complex> half_spectrum);

/// dx * sum of samples (periodic trapezoid rule).
double integrate(const Field& f);

/// sqrt(dx * sum |u_m|^2).
double l2_norm(const Field& f);

double linf_norm(std::span<const double> values);

}  // namespace aggspec

#endif  // AGGSPEC_SPECTRAL_HPP
