#include "aggspec/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aggspec {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

long steps_for(double interval, double dt) {
  return std::max(1L, std::lround(interval / dt));
}

}  // namespace

TimeScheme time_scheme_from_string(const std::string& name) {
  const auto n = lower(name);
  if (n == "integrating_factor" || n == "if" || n == "lawson") return TimeScheme::IntegratingFactor;
  if (n == "classical" || n == "rk4") return TimeScheme::Classical;
  throw ConfigurationError("unknown time scheme '" + name + "' (expected integrating_factor|classical)");
}

std::string to_string(TimeScheme scheme) {
  return scheme == TimeScheme::Classical ? "classical" : "integrating_factor";
}

MonitorMode monitor_mode_from_string(const std::string& name) {
  const auto n = lower(name);
  if (n == "off") return MonitorMode::Off;
  if (n == "warn") return MonitorMode::Warn;
  if (n == "strict") return MonitorMode::Strict;
  throw ConfigurationError("unknown monitor mode '" + name + "' (expected off|warn|strict)");
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Steady: return "Steady";
    case Outcome::TimedOut: return "TimedOut";
    case Outcome::Blowup: return "Blowup";
  }
  return "Unknown";
}

void IntegratorConfig::validate() const {
  std::vector<std::string> problems;
  if (!(dt > 0.0)) problems.push_back("dt must be positive");
  if (!(t_end > 0.0)) problems.push_back("t_end must be positive");
  if (!(snapshot_every >= dt)) problems.push_back("snapshot_every must be >= dt");
  if (!(check_every >= dt)) problems.push_back("check_every must be >= dt");
  if (!(steady_tol >= 0.0)) problems.push_back("steady_tol must be non-negative");
  if (!problems.empty()) {
    std::string msg = "invalid integrator configuration:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ConfigurationError(msg);
  }
}

double l2_norm(const SpeciesFields& u) {
  double sum = 0.0;
  for (double v : u.data()) sum += v * v;
  return std::sqrt(sum * u.grid().dx());
}

double l2_distance(const SpeciesFields& a, const SpeciesFields& b) {
  double sum = 0.0;
  const auto& x = a.data();
  const auto& y = b.data();
  for (std::size_t k = 0; k < x.size(); ++k) sum += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(sum * a.grid().dx());
}

Stepper::Stepper(const ModelParams& params, double dt, TimeScheme scheme)
    : params_(params),
      dt_(dt),
      scheme_(scheme),
      ws_(params),
      n_(params.species()),
      m_(params.grid().size()),
      half_(params.grid().spectrum_size()) {
  if (!(dt > 0.0)) throw ConfigurationError("time step must be positive");
  const std::size_t len = n_ * m_;
  const std::size_t hlen = n_ * half_;
  if (scheme_ == TimeScheme::Classical) {
    k1_.resize(len);
    k2_.resize(len);
    k3_.resize(len);
    k4_.resize(len);
    tmp_.resize(len);
    return;
  }
  decay_full_.resize(hlen);
  decay_half_.resize(hlen);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t h = 0; h < half_; ++h) {
      const double q = params.grid().wavenumber(h);
      const double rate = params.diffusion[i] * q * q;
      decay_full_[i * half_ + h] = std::exp(-rate * dt);
      decay_half_[i * half_ + h] = std::exp(-0.5 * rate * dt);
    }
  }
  tmp_.resize(len);
  for (auto* v : {&u_hat_, &stage_hat_, &a_, &b_, &c_, &d_}) v->resize(hlen);
}

void Stepper::step(std::span<double> u, double t) {
  if (scheme_ == TimeScheme::Classical) {
    step_classical(u, t);
  } else {
    step_integrating_factor(u, t);
  }
  if (!all_finite(u)) {
    throw IntegrationError("non-finite density after step at t=" + std::to_string(t + dt_), t + dt_);
  }
}

void Stepper::step_classical(std::span<double> u, double t) {
  const std::size_t len = u.size();
  const double h = dt_;
  auto stage = [&](int index, std::span<const double> input, std::vector<double>& out, double ts) {
    try {
      ws_.rhs(input, out, ts);
    } catch (const IntegrationError& e) {
      throw IntegrationError(std::string(e.what()) + " (RK4 stage " + std::to_string(index) + ")",
                             ts, index);
    }
  };
  stage(1, u, k1_, t);
  for (std::size_t k = 0; k < len; ++k) tmp_[k] = u[k] + 0.5 * h * k1_[k];
  stage(2, tmp_, k2_, t + 0.5 * h);
  for (std::size_t k = 0; k < len; ++k) tmp_[k] = u[k] + 0.5 * h * k2_[k];
  stage(3, tmp_, k3_, t + 0.5 * h);
  for (std::size_t k = 0; k < len; ++k) tmp_[k] = u[k] + h * k3_[k];
  stage(4, tmp_, k4_, t + h);
  for (std::size_t k = 0; k < len; ++k) {
    u[k] += h / 6.0 * (k1_[k] + 2.0 * k2_[k] + 2.0 * k3_[k] + k4_[k]);
  }
}

void Stepper::to_physical(std::span<const Complex> hat, std::span<double> u) {
  const Grid& grid = params_.grid();
  for (std::size_t i = 0; i < n_; ++i) {
    inverse(grid, hat.subspan(i * half_, half_), u.subspan(i * m_, m_));
  }
}

void Stepper::step_integrating_factor(std::span<double> u, double t) {
  const std::size_t hlen = n_ * half_;
  const double h = dt_;
  auto check = [&](int index, std::span<const double> input, double ts) {
    if (!all_finite(input)) {
      throw IntegrationError("non-finite density at t=" + std::to_string(ts) + " (RK4 stage " +
                                 std::to_string(index) + ")",
                             ts, index);
    }
  };

  check(1, u, t);
  ws_.transform(u, u_hat_);
  ws_.advection_spectrum(u, u_hat_, a_);

  for (std::size_t k = 0; k < hlen; ++k) stage_hat_[k] = decay_half_[k] * (u_hat_[k] + 0.5 * h * a_[k]);
  to_physical(stage_hat_, tmp_);
  check(2, tmp_, t + 0.5 * h);
  ws_.advection_spectrum(tmp_, stage_hat_, b_);

  for (std::size_t k = 0; k < hlen; ++k) stage_hat_[k] = decay_half_[k] * u_hat_[k] + 0.5 * h * b_[k];
  to_physical(stage_hat_, tmp_);
  check(3, tmp_, t + 0.5 * h);
  ws_.advection_spectrum(tmp_, stage_hat_, c_);

  for (std::size_t k = 0; k < hlen; ++k) {
    stage_hat_[k] = decay_full_[k] * u_hat_[k] + h * decay_half_[k] * c_[k];
  }
  to_physical(stage_hat_, tmp_);
  check(4, tmp_, t + h);
  ws_.advection_spectrum(tmp_, stage_hat_, d_);

  for (std::size_t k = 0; k < hlen; ++k) {
    stage_hat_[k] = decay_full_[k] * u_hat_[k] +
                    h / 6.0 * (decay_full_[k] * a_[k] + 2.0 * decay_half_[k] * (b_[k] + c_[k]) + d_[k]);
  }
  to_physical(stage_hat_, u);
}

State rk4_step(const State& state, const ModelParams& params, double dt, TimeScheme scheme) {
  if (!(state.grid() == params.grid())) throw GridMismatch("rk4_step: grids differ");
  Stepper stepper(params, dt, scheme);
  State next = state;
  stepper.step(next.densities().data(), state.time());
  next.set_time(state.time() + dt);
  return next;
}

namespace {

struct RunMonitor {
  const IntegratorConfig& cfg;
  std::vector<double> initial_mass;
  double initial_linf = 0.0;
  double initial_l2 = 0.0;
  double envelope_max = 0.0;
  std::vector<std::string>& warnings;
  bool warned_mass = false;
  bool warned_positivity = false;

  DiagnosticSample sample(const SpeciesFields& u, double t, double metric) const {
    DiagnosticSample d;
    d.t = t;
    d.steady_metric = metric;
    d.masses = total_mass(u);
    d.min_value = *std::min_element(u.data().begin(), u.data().end());
    d.l2_norms.resize(u.species());
    for (std::size_t i = 0; i < u.species(); ++i) d.l2_norms[i] = l2_norm(u.field(i));
    return d;
  }

  void inspect(const DiagnosticSample& d, const SpeciesFields& u) {
    if (cfg.monitors.mass != MonitorMode::Off) {
      for (std::size_t i = 0; i < d.masses.size(); ++i) {
        const double ref = initial_mass[i];
        const double drift = std::abs(d.masses[i] - ref) / std::max(std::abs(ref), 1e-300);
        if (drift > cfg.mass_tolerance) {
          std::ostringstream msg;
          msg << "mass drift " << drift << " of species " << i << " at t=" << d.t;
          if (cfg.monitors.mass == MonitorMode::Strict) throw MonitorError(msg.str(), d.t);
          if (!warned_mass) warnings.push_back(msg.str());
          warned_mass = true;
        }
      }
    }
    if (cfg.monitors.positivity != MonitorMode::Off) {
      const double top = *std::max_element(u.data().begin(), u.data().end());
      if (d.min_value < -cfg.positivity_tolerance * std::max(top, 0.0)) {
        std::ostringstream msg;
        msg << "negative density " << d.min_value << " at t=" << d.t;
        if (cfg.monitors.positivity == MonitorMode::Strict) throw MonitorError(msg.str(), d.t);
        if (!warned_positivity) warnings.push_back(msg.str());
        warned_positivity = true;
      }
    }
  }
};

}  // namespace

RunResult run(const State& initial, const ModelParams& params, const IntegratorConfig& cfg,
              RecordHeader header) {
  cfg.validate();
  if (!(initial.grid() == params.grid())) throw GridMismatch("run: initial state grid differs");
  if (initial.species() != params.species()) {
    throw ConfigurationError("run: species count of the initial state does not match parameters");
  }

  RunResult result{initial, Outcome::TimedOut, initial.time(),
                   SimulationRecord(initial.grid(), initial.species()), {}, {}, {}};
  result.snapshots.header = std::move(header);
  auto& record = result.snapshots;

  SpeciesFields u = initial.densities();
  double t = initial.time();
  const double t0 = t;

  const long total_steps = std::lround(cfg.t_end / cfg.dt);
  const long snap_steps = steps_for(cfg.snapshot_every, cfg.dt);
  const long check_steps = steps_for(cfg.check_every, cfg.dt);
  const double check_interval = static_cast<double>(check_steps) * cfg.dt;

  RunMonitor monitor{cfg, total_mass(u), linf_norm(u.data()), l2_norm(u), 0.0, result.warnings};
  monitor.envelope_max = monitor.initial_l2;
  const double blowup_limit = cfg.blowup_factor * std::max(monitor.initial_linf, 1e-300);

  auto snapshot = [&](double time) { record.frames.push_back(Frame{time, u.data()}); };
  auto finish = [&](Outcome outcome, double time) {
    result.outcome = outcome;
    result.outcome_time = time;
    if (record.frames.empty() || record.frames.back().t < time) snapshot(time);
    State final_state(u, time);
    result.final_state = std::move(final_state);
    result.l2_envelope.c = monitor.initial_l2;
  };

  snapshot(t);
  record.diagnostics.push_back(monitor.sample(u, t, std::numeric_limits<double>::quiet_NaN()));
  monitor.inspect(record.diagnostics.back(), u);

  Stepper stepper(params, cfg.dt, cfg.scheme);
  SpeciesFields previous_check = u;
  std::vector<double> last_good = u.data();

  for (long n = 1; n <= total_steps; ++n) {
    last_good = u.data();
    try {
      stepper.step(u.data(), t);
    } catch (const IntegrationError& e) {
      u.data() = last_good;
      result.failure = e.what();
      finish(Outcome::Blowup, t);
      return result;
    }
    t = t0 + static_cast<double>(n) * cfg.dt;

    if (linf_norm(u.data()) > blowup_limit) {
      std::ostringstream msg;
      msg << "max density exceeded " << cfg.blowup_factor << "x its initial value at t=" << t;
      result.failure = msg.str();
      finish(Outcome::Blowup, t);
      return result;
    }

    if (n % snap_steps == 0) snapshot(t);

    const bool at_check = n % check_steps == 0;
    if (at_check) {
      const double metric = l2_distance(u, previous_check) / check_interval;
      previous_check = u;
      auto d = monitor.sample(u, t, metric);
      record.diagnostics.push_back(d);
      if (cfg.monitors.l2_growth) {
        const double l2 = l2_norm(u);
        monitor.envelope_max = std::max(monitor.envelope_max, l2);
        if (monitor.initial_l2 > 0.0 && t > t0) {
          const double rate = std::log(monitor.envelope_max / monitor.initial_l2) / (t - t0);
          result.l2_envelope.alpha = std::max(result.l2_envelope.alpha, rate);
        }
      }
      try {
        monitor.inspect(d, u);
      } catch (const MonitorError&) {
        finish(Outcome::TimedOut, t);
        throw;
      }
      if (metric < cfg.steady_tol) {
        finish(Outcome::Steady, t);
        return result;
      }
    }
  }
  finish(Outcome::TimedOut, t);
  return result;
}

}  // namespace aggspec
