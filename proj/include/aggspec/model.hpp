#ifndef AGGSPEC_MODEL_HPP
#define AGGSPEC_MODEL_HPP

/**
 * @file model.hpp
 * @brief N-species nonlocal aggregation-diffusion system on a periodic line.
 *
 *   du_i/dt = D_i u_i'' - ( u_i ( sum_j h_ij K * u_j )' )'
 *
 * The right-hand side is assembled pseudo-spectrally: convolutions and
 * derivatives in Fourier space, the product u_i * v_i in physical space.
 */

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggspec/kernels.hpp"
#include "aggspec/spectral.hpp"

namespace aggspec {

/// Dense row-major N x N interaction matrix; h(i, j) is the response of i to j.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;
  InteractionMatrix(std::size_t n, std::vector<double> row_major);
  static InteractionMatrix zeros(std::size_t n);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return h_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return h_[i * n_ + j]; }
  const std::vector<double>& row_major() const { return h_; }

  friend InteractionMatrix operator+(const InteractionMatrix& a, const InteractionMatrix& b);

 private:
  std::size_t n_ = 0;
  std::vector<double> h_;
};

struct ModelParams {
  ModelParams(std::vector<double> diffusion, InteractionMatrix interaction, Kernel kernel);

  std::size_t species() const { return diffusion.size(); }
  const Grid& grid() const { return kernel.grid(); }

  std::vector<double> diffusion;
  InteractionMatrix interaction;
  Kernel kernel;
  /// Apply 2/3-rule truncation to the product u_i * v_i before differentiating.
  bool dealias = false;
};

/// N fields on one grid stored contiguously, species-major.
class SpeciesFields {
 public:
  SpeciesFields(Grid grid, std::size_t species);
  SpeciesFields(Grid grid, std::size_t species, std::vector<double> data);

  const Grid& grid() const { return grid_; }
  std::size_t species() const { return species_; }
  std::size_t points() const { return grid_.size(); }

  std::span<double> operator[](std::size_t i) {
    return std::span<double>(data_).subspan(i * points(), points());
  }
  std::span<const double> operator[](std::size_t i) const {
    return std::span<const double>(data_).subspan(i * points(), points());
  }
  Field field(std::size_t i) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  Grid grid_;
  std::size_t species_;
  std::vector<double> data_;
};

/// Densities at one instant plus the masses recorded when the state was created.
class State {
 public:
  State(SpeciesFields densities, double time);

  const Grid& grid() const { return u_.grid(); }
  std::size_t species() const { return u_.species(); }
  double time() const { return t_; }
  void set_time(double t) { t_ = t; }

  SpeciesFields& densities() { return u_; }
  const SpeciesFields& densities() const { return u_; }
  std::span<const double> operator[](std::size_t i) const { return u_[i]; }

  const std::vector<double>& initial_masses() const { return initial_masses_; }

 private:
  SpeciesFields u_;
  double t_;
  std::vector<double> initial_masses_;
};

/// Non-finite state or tendency encountered during evaluation or time stepping.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time, int stage = -1)
      : std::runtime_error(what), time_(time), stage_(stage) {}
  double time() const { return time_; }
  /// Runge-Kutta stage 1..4, or -1 when not inside a step.
  int stage() const { return stage_; }

 private:
  double time_;
  int stage_;
};

/// K * u_j via the convolution theorem.
Field nonlocal_average(const Field& u, const Kernel& kernel);

/**
 * Scratch buffers for repeated right-hand-side evaluation.
 *
 * One workspace per thread. Spectra are half spectra of length M/2+1 per species,
 * laid out species-major.
 */
class RhsWorkspace {
 public:
  explicit RhsWorkspace(const ModelParams& params);

  std::size_t spectrum_stride() const { return half_; }

  /// Forward transform of every species.
  void transform(std::span<const double> u, std::span<Complex> u_hat);

  /// Spectrum of -(u_i (sum_j h_ij K*u_j)')' given u and its spectrum.
  void advection_spectrum(std::span<const double> u, std::span<const Complex> u_hat,
                          std::span<Complex> out);

  /// Spectrum of D_i u_i''.
  void diffusion_spectrum(std::span<const Complex> u_hat, std::span<Complex> out) const;

  /// Full physical-space tendency.
  void rhs(std::span<const double> u, std::span<double> out, double time = 0.0);

  const ModelParams& params() const { return params_; }

 private:
  const ModelParams& params_;
  std::size_t n_;
  std::size_t m_;
  std::size_t half_;
  std::vector<Complex> kernel_hat_;  // L * c_h(K)
  std::vector<Complex> scratch_hat_;
  std::vector<Complex> mix_hat_;
  std::vector<Complex> u_hat_;
  std::vector<Complex> total_hat_;
  std::vector<double> velocity_;
};

/// du/dt for the given state; throws IntegrationError on non-finite input.
SpeciesFields rhs(const State& state, const ModelParams& params);

/// Only the nonlocal advection part of the tendency.
SpeciesFields advective_tendency(const State& state, const ModelParams& params);

/// p_i = dx * sum_m u_i[m].
std::vector<double> total_mass(const State& state);
std::vector<double> total_mass(const SpeciesFields& u);

/// Periodic shift of all species by whole grid cells (positive moves mass right).
SpeciesFields shift_cells(const SpeciesFields& u, long cells);

/// Homogeneous state with the given per-species mean densities.
State homogeneous_state(const Grid& grid, std::span<const double> means);

}  // namespace aggspec

#endif  // AGGSPEC_MODEL_HPP
