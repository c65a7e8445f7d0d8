#ifndef AGGSPEC_TESTS_ORACLES_HPP
#define AGGSPEC_TESTS_ORACLES_HPP

// Reference implementations that share no code with the library: direct
// O(M^2) transforms, quadrature convolution, finite differences and an
// adaptive embedded Runge-Kutta integrator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

inline std::vector<cplx> dft(const std::vector<double>& u) {
  const std::size_t m = u.size();
  std::vector<cplx> c(m);
  for (std::size_t h = 0; h < m; ++h) {
    cplx s = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      s += u[x] * std::polar(1.0, -2.0 * pi * static_cast<double>(h * x % m) / static_cast<double>(m));
    }
    c[h] = s / static_cast<double>(m);
  }
  return c;
}

inline std::vector<double> idft(const std::vector<cplx>& c) {
  const std::size_t m = c.size();
  std::vector<double> u(m);
  for (std::size_t x = 0; x < m; ++x) {
    cplx s = 0.0;
    for (std::size_t h = 0; h < m; ++h) {
      s += c[h] * std::polar(1.0, 2.0 * pi * static_cast<double>(h * x % m) / static_cast<double>(m));
    }
    u[x] = s.real();
  }
  return u;
}

// dx * sum_n f(x_m - x_n) g(x_n)
inline std::vector<double> quad_convolve(const std::vector<double>& f, const std::vector<double>& g, double dx) {
  const std::size_t m = f.size();
  std::vector<double> out(m, 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    double s = 0.0;
    for (std::size_t n = 0; n < m; ++n) s += f[(x + m - n) % m] * g[n];
    out[x] = dx * s;
  }
  return out;
}

// Fourth-order centred first derivative on a periodic grid.
inline std::vector<double> fd4(const std::vector<double>& u, double dx) {
  const std::size_t m = u.size();
  std::vector<double> d(m);
  for (std::size_t x = 0; x < m; ++x) {
    const double up1 = u[(x + 1) % m], up2 = u[(x + 2) % m];
    const double um1 = u[(x + m - 1) % m], um2 = u[(x + m - 2) % m];
    d[x] = (-up2 + 8.0 * up1 - 8.0 * um1 + um2) / (12.0 * dx);
  }
  return d;
}

// Fourth-order centred second derivative on a periodic grid.
inline std::vector<double> fd4_second(const std::vector<double>& u, double dx) {
  const std::size_t m = u.size();
  std::vector<double> d(m);
  for (std::size_t x = 0; x < m; ++x) {
    const double up1 = u[(x + 1) % m], up2 = u[(x + 2) % m];
    const double um1 = u[(x + m - 1) % m], um2 = u[(x + m - 2) % m];
    d[x] = (-up2 + 16.0 * up1 - 30.0 * u[x] + 16.0 * um1 - um2) / (12.0 * dx * dx);
  }
  return d;
}

// Normalized von Mises samples, normalized by the discrete sum rather than a Bessel function.
inline std::vector<double> von_mises_samples(std::size_t m, double length, double a) {
  std::vector<double> k(m);
  double s = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    k[x] = std::exp(a * (std::cos(2.0 * pi * static_cast<double>(x) / static_cast<double>(m)) - 1.0));
    s += k[x];
  }
  for (auto& v : k) v /= s * length / static_cast<double>(m);
  return k;
}

// Right-hand side D u'' - (u sum_j h_ij (K*u_j)')' by quadrature and finite differences.
inline std::vector<double> model_rhs(const std::vector<double>& u, std::size_t n, std::size_t m, double length,
                                     const std::vector<double>& d, const std::vector<double>& h,
                                     const std::vector<double>& kernel) {
  const double dx = length / static_cast<double>(m);
  std::vector<std::vector<double>> avg(n);
  for (std::size_t j = 0; j < n; ++j) {
    avg[j] = quad_convolve(kernel, std::vector<double>(u.begin() + j * m, u.begin() + (j + 1) * m), dx);
  }
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> mix(m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t x = 0; x < m; ++x) mix[x] += h[i * n + j] * avg[j][x];
    }
    const auto vel = fd4(mix, dx);
    std::vector<double> ui(u.begin() + i * m, u.begin() + (i + 1) * m);
    std::vector<double> flux(m);
    for (std::size_t x = 0; x < m; ++x) flux[x] = ui[x] * vel[x];
    const auto div = fd4(flux, dx);
    const auto lap = fd4_second(ui, dx);
    for (std::size_t x = 0; x < m; ++x) out[i * m + x] = d[i] * lap[x] - div[x];
  }
  return out;
}

using Rhs = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Dormand-Prince 5(4) with mixed absolute/relative error control.
inline std::vector<double> dormand_prince(const Rhs& f, std::vector<double> y, double t_end, double tol,
                                          double h = 1e-6) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n);
  double t = 0.0;
  f(y, k1);
  while (t < t_end) {
    const bool last = t + h >= t_end;
    if (last) h = t_end - t;
    auto stage = [&](std::vector<double>& out, auto&& combine) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * combine(i);
      f(tmp, out);
    };
    stage(k2, [&](std::size_t i) { return a21 * k1[i]; });
    stage(k3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    stage(k4, [&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    stage(k5, [&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
    stage(k6, [&](std::size_t i) {
      return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
    });
    for (std::size_t i = 0; i < n; ++i) {
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    f(y5, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = tol * (1.0 + std::max(std::abs(y[i]), std::abs(y5[i])));
      err = std::max(err, std::abs(e) / scale);
    }
    if (err <= 1.0) {
      t = last ? t_end : t + h;
      y.swap(y5);
      k1.swap(k7);
      if (last) break;
    }
    h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
  }
  return y;
}

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t m, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(m);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace oracle

#endif  // AGGSPEC_TESTS_ORACLES_HPP
