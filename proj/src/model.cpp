#include "aggspec/model.hpp"

#include <cmath>
#include <string>

namespace aggspec {

namespace {

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void multiply_by_ik(const Grid& grid, std::span<Complex> half) {
  const std::size_t nyquist = grid.size() / 2;
  for (std::size_t h = 0; h < nyquist; ++h) half[h] *= Complex(0.0, grid.wavenumber(h));
  half[nyquist] = 0.0;
}

}  // namespace

InteractionMatrix::InteractionMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), h_(std::move(row_major)) {
  if (h_.size() != n_ * n_) {
    throw ConfigurationError("interaction matrix needs " + std::to_string(n_ * n_) +
                             " entries, got " + std::to_string(h_.size()));
  }
  for (double v : h_) {
    if (!std::isfinite(v)) throw ConfigurationError("interaction matrix entries must be finite");
  }
}

InteractionMatrix InteractionMatrix::zeros(std::size_t n) {
  return InteractionMatrix(n, std::vector<double>(n * n, 0.0));
}

InteractionMatrix operator+(const InteractionMatrix& a, const InteractionMatrix& b) {
  if (a.n_ != b.n_) throw ConfigurationError("interaction matrices differ in size");
  std::vector<double> sum(a.h_.size());
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = a.h_[k] + b.h_[k];
  return InteractionMatrix(a.n_, std::move(sum));
}

ModelParams::ModelParams(std::vector<double> d, InteractionMatrix h, Kernel k)
    : diffusion(std::move(d)), interaction(std::move(h)), kernel(std::move(k)) {
  if (diffusion.empty()) throw ConfigurationError("at least one species is required");
  if (interaction.size() != diffusion.size()) {
    throw ConfigurationError("interaction matrix is " + std::to_string(interaction.size()) + "x" +
                             std::to_string(interaction.size()) + " but there are " +
                             std::to_string(diffusion.size()) + " species");
  }
  for (std::size_t i = 0; i < diffusion.size(); ++i) {
    if (!(diffusion[i] > 0.0) || !std::isfinite(diffusion[i])) {
      throw ConfigurationError("diffusion constant D[" + std::to_string(i) + "] must be positive");
    }
  }
}

SpeciesFields::SpeciesFields(Grid grid, std::size_t species)
    : grid_(grid), species_(species), data_(species * grid.size(), 0.0) {}

SpeciesFields::SpeciesFields(Grid grid, std::size_t species, std::vector<double> data)
    : grid_(grid), species_(species), data_(std::move(data)) {
  if (data_.size() != species_ * grid_.size()) {
    throw ConfigurationError("species data has " + std::to_string(data_.size()) +
                             " values, expected " + std::to_string(species_ * grid_.size()));
  }
}

Field SpeciesFields::field(std::size_t i) const {
  auto s = (*this)[i];
  return Field(grid_, std::vector<double>(s.begin(), s.end()));
}

State::State(SpeciesFields densities, double time)
    : u_(std::move(densities)), t_(time), initial_masses_(total_mass(u_)) {
  if (u_.species() == 0) throw ConfigurationError("state needs at least one species");
}

Field nonlocal_average(const Field& u, const Kernel& kernel) {
  if (!(u.grid() == kernel.grid())) throw GridMismatch("nonlocal_average: kernel grid differs");
  return inverse(spectral_convolve(kernel.spectrum(), forward(u)));
}

RhsWorkspace::RhsWorkspace(const ModelParams& params)
    : params_(params),
      n_(params.species()),
      m_(params.grid().size()),
      half_(params.grid().spectrum_size()),
      kernel_hat_(half_),
      scratch_hat_(n_ * half_),
      mix_hat_(half_),
      u_hat_(n_ * half_),
      total_hat_(n_ * half_),
      velocity_(m_) {
  const double length = params.grid().length();
  auto k = params.kernel.spectrum().coeffs();
  for (std::size_t h = 0; h < half_; ++h) kernel_hat_[h] = length * k[h];
}

void RhsWorkspace::transform(std::span<const double> u, std::span<Complex> u_hat) {
  const Grid& grid = params_.grid();
  for (std::size_t i = 0; i < n_; ++i) {
    forward(grid, u.subspan(i * m_, m_), u_hat.subspan(i * half_, half_));
  }
}

void RhsWorkspace::advection_spectrum(std::span<const double> u, std::span<const Complex> u_hat,
                                      std::span<Complex> out) {
  const Grid& grid = params_.grid();
  const auto& h = params_.interaction;

  // (1) nonlocal averages K * u_j
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t q = 0; q < half_; ++q) {
      scratch_hat_[j * half_ + q] = kernel_hat_[q] * u_hat[j * half_ + q];
    }
  }

  for (std::size_t i = 0; i < n_; ++i) {
    // (2) v_i = d/dx sum_j h_ij (K * u_j)
    std::fill(mix_hat_.begin(), mix_hat_.end(), Complex(0.0));
    for (std::size_t j = 0; j < n_; ++j) {
      const double hij = h(i, j);
      if (hij == 0.0) continue;
      for (std::size_t q = 0; q < half_; ++q) mix_hat_[q] += hij * scratch_hat_[j * half_ + q];
    }
    multiply_by_ik(grid, mix_hat_);
    inverse(grid, mix_hat_, velocity_);

    // (3) flux w_i = u_i v_i in physical space
    auto ui = u.subspan(i * m_, m_);
    for (std::size_t x = 0; x < m_; ++x) velocity_[x] *= ui[x];

    // (4) -d/dx w_i
    auto oi = out.subspan(i * half_, half_);
    forward(grid, velocity_, oi);
    if (params_.dealias) dealias_two_thirds(oi);
    multiply_by_ik(grid, oi);
    for (auto& c : oi) c = -c;
  }
}

void RhsWorkspace::diffusion_spectrum(std::span<const Complex> u_hat, std::span<Complex> out) const {
  const Grid& grid = params_.grid();
  for (std::size_t i = 0; i < n_; ++i) {
    const double d = params_.diffusion[i];
    for (std::size_t q = 0; q < half_; ++q) {
      const double k = grid.wavenumber(q);
      out[i * half_ + q] = -d * k * k * u_hat[i * half_ + q];
    }
  }
}

void RhsWorkspace::rhs(std::span<const double> u, std::span<double> out, double time) {
  if (!all_finite(u)) {
    throw IntegrationError("non-finite density at t=" + std::to_string(time), time);
  }
  transform(u, u_hat_);
  advection_spectrum(u, u_hat_, total_hat_);
  // (5) diffusion, accumulated onto the advective spectrum
  const Grid& grid = params_.grid();
  for (std::size_t i = 0; i < n_; ++i) {
    const double d = params_.diffusion[i];
    for (std::size_t q = 0; q < half_; ++q) {
      const double k = grid.wavenumber(q);
      total_hat_[i * half_ + q] -= d * k * k * u_hat_[i * half_ + q];
    }
    inverse(grid, std::span<const Complex>(total_hat_).subspan(i * half_, half_),
            out.subspan(i * m_, m_));
  }
}

SpeciesFields rhs(const State& state, const ModelParams& params) {
  if (!(state.grid() == params.grid())) throw GridMismatch("rhs: state and kernel grids differ");
  if (state.species() != params.species()) {
    throw ConfigurationError("rhs: state has " + std::to_string(state.species()) +
                             " species, parameters describe " + std::to_string(params.species()));
  }
  RhsWorkspace ws(params);
  SpeciesFields out(state.grid(), state.species());
  ws.rhs(state.densities().data(), out.data(), state.time());
  return out;
}

SpeciesFields advective_tendency(const State& state, const ModelParams& params) {
  if (!(state.grid() == params.grid())) throw GridMismatch("advective_tendency: grids differ");
  RhsWorkspace ws(params);
  const std::size_t n = params.species();
  const std::size_t half = ws.spectrum_stride();
  std::vector<Complex> u_hat(n * half);
  std::vector<Complex> adv(n * half);
  ws.transform(state.densities().data(), u_hat);
  ws.advection_spectrum(state.densities().data(), u_hat, adv);
  SpeciesFields out(state.grid(), n);
  for (std::size_t i = 0; i < n; ++i) {
    inverse(state.grid(), std::span<const Complex>(adv).subspan(i * half, half), out[i]);
  }
  return out;
}

std::vector<double> total_mass(const SpeciesFields& u) {
  std::vector<double> masses(u.species());
  for (std::size_t i = 0; i < u.species(); ++i) {
    double sum = 0.0;
    for (double v : u[i]) sum += v;
    masses[i] = sum * u.grid().dx();
  }
  return masses;
}

std::vector<double> total_mass(const State& state) { return total_mass(state.densities()); }

SpeciesFields shift_cells(const SpeciesFields& u, long cells) {
  SpeciesFields out(u.grid(), u.species());
  const long m = static_cast<long>(u.points());
  const long s = ((cells % m) + m) % m;
  for (std::size_t i = 0; i < u.species(); ++i) {
    auto src = u[i];
    auto dst = out[i];
    for (long x = 0; x < m; ++x) dst[static_cast<std::size_t>((x + s) % m)] = src[x];
  }
  return out;
}

State homogeneous_state(const Grid& grid, std::span<const double> means) {
  SpeciesFields u(grid, means.size());
  for (std::size_t i = 0; i < means.size(); ++i) std::fill(u[i].begin(), u[i].end(), means[i]);
  return State(std::move(u), 0.0);
}

}  // namespace aggspec
