#ifndef AGGSPEC_KERNELS_HPP
#define AGGSPEC_KERNELS_HPP

/**
 * @file kernels.hpp
 * @brief Spatial averaging kernels on the periodic grid.
 *
 * A kernel is a probability density on [0, L) centred at x = 0. Samples are
 * stored at the grid points with the periodic convention of
 * Grid::centered_x, so index 0 is the centre and indices above M/2 hold the
 * negative half.
 *
 * Two families are provided:
 *
 *   von Mises  K_a(x) = exp(a cos(2 pi x / L)) / (L I_0(a))
 *   top hat    K_g(x) = 1 / (2 g)   for |x| <= g, 0 otherwise
 *
 * Both are renormalized so that the trapezoid integral over the grid is 1.
 * The standard deviation is sqrt(int x^2 K - (int x K)^2) over [-L/2, L/2].
 */

#include <optional>
#include <string>
#include <vector>

#include "aggspec/spectral.hpp"

namespace aggspec {

enum class KernelFamily { VonMises, TopHat, Custom };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// log I_0(a) for a >= 0: power series below 15, asymptotic expansion above.
double log_bessel_i0(double a);

/// I_0(a); overflows to +inf beyond a ~ 713, use log_bessel_i0 there.
double bessel_i0(double a);

class Kernel {
 public:
  const Grid& grid() const { return samples_.grid(); }
  const Field& samples() const { return samples_; }
  const SpectralField& spectrum() const { return spectrum_; }
  KernelFamily family() const { return family_; }

  /// Family parameter: a for von Mises, gamma for top hat, NaN for custom.
  double parameter() const { return parameter_; }
  double sigma() const { return sigma_; }

  /// Continuous-normalized Fourier coefficient L * c_h (equals 1 at h = 0).
  double transform_at(std::size_t h) const;

  friend Kernel von_mises(const Grid& grid, double a);
  friend Kernel top_hat(const Grid& grid, double gamma, bool analytic_spectrum);
  friend Kernel custom_kernel(Field samples);

 private:
  Kernel(Field samples, SpectralField spectrum, KernelFamily family, double parameter);

  Field samples_;
  SpectralField spectrum_;
  KernelFamily family_;
  double parameter_;
  double sigma_ = 0.0;
};

Kernel von_mises(const Grid& grid, double a);

/// Cell-averaged top hat. With analytic_spectrum the stored spectrum is the
/// exact sinc series of the continuous kernel instead of the DFT of samples.
Kernel top_hat(const Grid& grid, double gamma, bool analytic_spectrum = false);

/// Arbitrary non-negative, symmetric samples; normalized on construction.
Kernel custom_kernel(Field samples);

/// Load M whitespace-separated samples from a text file.
Kernel load_custom_kernel(const Grid& grid, const std::string& path);

/// Standard deviation of a normalized density sampled on the grid.
double kernel_sigma(const Field& samples);
double kernel_sigma(const Kernel& k);

/// Build a kernel of the given family and parameter.
Kernel make_kernel(KernelFamily family, const Grid& grid, double parameter);

/// Parameter p of the family such that |sigma(p) - target| <= 1e-6 (bisection).
double solve_param_for_sigma(KernelFamily family, double sigma_target, const Grid& grid);

}  // namespace aggspec

#endif  // AGGSPEC_KERNELS_HPP
