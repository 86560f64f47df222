#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "capwave/collision.hpp"
#include "capwave/config.hpp"
#include "capwave/moments.hpp"
#include "capwave/parallel.hpp"
#include "capwave/snapshot.hpp"
#include "capwave/summation.hpp"

namespace capwave {

struct StepReport {
  double clipped_mass = 0.0;    // sum of |negative f| vol removed by clipping
  double clipped_energy = 0.0;  // same, weighted by E
  int halvings = 0;             // deepest dt halving used by reject-step
  std::size_t substeps = 1;
};

/// 2 nu sum_i f_i E_i (k_i^2 + rho k_i^4) vol_i.
inline double dissipation(const Spectrum& f, const PhysicsParams& params) {
  const auto& g = *f.grid;
  CompensatedSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double k = g.node(i);
    acc.add(f.values[i] * params.law.energy(k) * damping_rate(k, params) * g.volume(i));
  }
  return acc.value();
}

/// One-step map for df/dt = Q[f] - D(k) f on a fixed triad table.
class Integrator {
 public:
  Integrator(const TriadTable& table, PhysicsParams physics, SchemeConfig scheme,
             OperatorForm form = OperatorForm::Conservative, Execution exec = {})
      : table_(table), physics_(physics), scheme_(scheme), form_(form), exec_(exec) {
    if (!(scheme_.dt > 0.0)) throw std::invalid_argument("Integrator: dt must be > 0");
    if (physics_.nu < 0.0 || physics_.rho < 0.0) {
      throw std::invalid_argument("Integrator: nu and rho must be >= 0");
    }
    if (scheme_.scheme == Scheme::EulerTruncated && !(scheme_.truncation_radius > 0.0)) {
      throw std::invalid_argument("Integrator: truncation radius must be > 0");
    }
    const auto& g = *table_.grid();
    damping_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) damping_[i] = damping_rate(g.node(i), physics_);
  }

  const std::vector<double>& damping() const { return damping_; }

  std::vector<double> collision(const Spectrum& f) const {
    return form_ == OperatorForm::Conservative ? q_conservative(f, table_, exec_)
                                               : q_direct(f, table_, exec_);
  }

  /// Largest step for which the truncated Euler update keeps f >= 0:
  /// 1 / (max_{k<=R} loss rate of f_R + 2 nu (R^2 + rho R^4)).
  double truncated_step_bound(const Spectrum& f) const {
    const auto fr = truncate(f);
    const auto split = q_direct_split(fr, table_, exec_);
    const auto& g = *f.grid;
    double c_f = 0.0;
    for (std::size_t i = 0; i < g.size() && g.node(i) <= scheme_.truncation_radius; ++i) {
      c_f = std::max(c_f, split.loss_rate[i]);
    }
    const double rate = c_f + damping_rate(scheme_.truncation_radius, physics_);
    return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
  }

  /// Advances f by dt (the configured step unless overridden).
  Spectrum step(const Spectrum& f, StepReport* report = nullptr) const {
    return step(f, scheme_.dt, report);
  }

  Spectrum step(const Spectrum& f, double dt, StepReport* report) const {
    StepReport local;
    Spectrum out = advance(f, dt, 0, local);
    if (report) *report = local;
    return out;
  }

 private:
  Spectrum truncate(const Spectrum& f) const {
    Spectrum fr = f;
    const auto& g = *f.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.node(i) > scheme_.truncation_radius) fr.values[i] = 0.0;
    }
    return fr;
  }

  Spectrum advance(const Spectrum& f, double dt, int depth, StepReport& report) const {
    Spectrum trial = scheme_.scheme == Scheme::Rk4IntegratingFactor ? rk4_if(f, dt)
                                                                    : euler_truncated(f, dt, report);
    const bool negative =
        std::any_of(trial.values.begin(), trial.values.end(), [](double v) { return v < 0.0; });
    if (!negative) return trial;
    if (scheme_.positivity == PositivityMode::Clip) {
      const auto& g = *f.grid;
      for (std::size_t i = 0; i < trial.size(); ++i) {
        if (trial.values[i] < 0.0) {
          report.clipped_mass += -trial.values[i] * g.volume(i);
          report.clipped_energy += -trial.values[i] * table_.node_energy()[i] * g.volume(i);
          trial.values[i] = 0.0;
        }
      }
      return trial;
    }
    if (depth >= 20) {
      throw std::runtime_error("step: positivity still violated after 20 halvings of dt=" +
                               format_g17(dt * std::ldexp(1.0, depth)) + " at t=" +
                               format_g17(f.time));
    }
    report.halvings = std::max(report.halvings, depth + 1);
    const Spectrum half = advance(f, 0.5 * dt, depth + 1, report);
    return advance(half, 0.5 * dt, depth + 1, report);
  }

  Spectrum rk4_if(const Spectrum& f, double dt) const {
    const std::size_t n = f.size();
    std::vector<double> e1(n), eh(n);
    for (std::size_t i = 0; i < n; ++i) {
      e1[i] = std::exp(-damping_[i] * dt);
      eh[i] = std::exp(-0.5 * damping_[i] * dt);
    }
    Spectrum s = f;
    const auto k1 = collision(f);
    for (std::size_t i = 0; i < n; ++i) s.values[i] = eh[i] * (f.values[i] + 0.5 * dt * k1[i]);
    const auto k2 = collision(s);
    for (std::size_t i = 0; i < n; ++i) s.values[i] = eh[i] * f.values[i] + 0.5 * dt * k2[i];
    const auto k3 = collision(s);
    for (std::size_t i = 0; i < n; ++i) s.values[i] = e1[i] * f.values[i] + dt * eh[i] * k3[i];
    const auto k4 = collision(s);
    Spectrum out = f;
    for (std::size_t i = 0; i < n; ++i) {
      out.values[i] = e1[i] * f.values[i] +
                      dt / 6.0 * (e1[i] * k1[i] + 2.0 * eh[i] * (k2[i] + k3[i]) + k4[i]);
    }
    out.time = f.time + dt;
    return out;
  }

  /// Substeps of f + h (Q[f_R] - D f_R) with h <= the positivity bound.
  Spectrum euler_truncated(const Spectrum& f, double dt, StepReport& report) const {
    Spectrum cur = f;
    double remaining = dt;
    std::size_t substeps = 0;
    while (remaining > 0.0) {
      double h = std::min(remaining, truncated_step_bound(cur));
      if (remaining - h < 1e-12 * dt) h = remaining;
      const auto fr = truncate(cur);
      const auto split = q_direct_split(fr, table_, exec_);
      for (std::size_t i = 0; i < cur.size(); ++i) {
        const double q = split.gain[i] - std::max(0.0, fr.values[i]) * split.loss_rate[i];
        cur.values[i] += h * (q - damping_[i] * fr.values[i]);
      }
      remaining -= h;
      ++substeps;
      if (substeps > 10'000'000) throw std::runtime_error("euler_truncated: step bound collapsed");
    }
    cur.time = f.time + dt;
    report.substeps = std::max(report.substeps, substeps);
    return cur;
  }

  const TriadTable& table_;
  PhysicsParams physics_;
  SchemeConfig scheme_;
  OperatorForm form_;
  Execution exec_;
  std::vector<double> damping_;
};

struct MonitorBreach {
  double time = 0.0;
  std::string norm;  // "L1_1/3", "L1_1", "L1_N+3"
  double value = 0.0;
  double bound = 0.0;
};

struct Trajectory {
  std::vector<MomentRecord> moments;  // uniform in time
  std::vector<Spectrum> snapshots;
  std::vector<MonitorBreach> breaches;
  double clipped_mass = 0.0;
  double clipped_energy = 0.0;
  int max_halvings = 0;
  std::size_t steps = 0;
  double min_value = std::numeric_limits<double>::infinity();  // over every step
  double dt = 0.0;
};

/// Thrown when a run stops early; carries everything recorded up to that point.
class SimulationAborted : public std::runtime_error {
 public:
  SimulationAborted(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

inline Spectrum initial_spectrum(const SimConfig& config, const GridPtr& grid) {
  return std::visit(
      [&](const auto& ic) -> Spectrum {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, GaussianBump>) {
          return Spectrum::sample(grid, [&](double k) {
            const double z = (k - ic.center) / ic.width;
            return ic.amplitude * std::exp(-0.5 * z * z);
          });
        } else if constexpr (std::is_same_v<T, PowerLawInit>) {
          return Spectrum::sample(grid, [&](double k) {
            return (k >= ic.band_lo && k <= ic.band_hi) ? ic.amplitude * std::pow(k, -ic.exponent)
                                                        : 0.0;
          });
        } else {
          const auto file = read_snapshot(ic.path);
          if (file.spectrum.grid->dim() != grid->dim()) {
            throw std::runtime_error("initial condition " + ic.path + " has dimension " +
                                     std::to_string(file.spectrum.grid->dim()));
          }
          if (file.spectrum.grid->same_as(*grid)) return Spectrum(grid, file.spectrum.values);
          return Spectrum::sample(grid, [&](double k) { return interpolate_f(file.spectrum, k); });
        }
      },
      config.initial);
}

inline CollisionOptions collision_options(const SimConfig& config) {
  CollisionOptions o;
  o.quad_order = config.collision.quad_order;
  o.closed_system = config.collision.closed_system;
  o.low_slope = config.collision.low_slope;
  o.kernel_constant = config.kernel_constant;
  return o;
}

/// Integrates from the configured initial data to t_end.
///
/// The step is t_end / ceil(t_end / dt). Moments are recorded every
/// max(1, round(moment_interval / step)) steps and snapshots at the step
/// nearest to each requested time.
inline Trajectory run(const SimConfig& config, const Execution& exec = {}) {
  auto grid = make_grid(config.grid, config.physics.law.dim());
  const auto table = build_triad_table(grid, config.physics.law, collision_options(config));
  const auto steps = static_cast<std::size_t>(
      std::max(1.0, std::ceil(config.scheme.t_end / config.scheme.dt - 1e-9)));
  const double dt = config.scheme.t_end / static_cast<double>(steps);
  SchemeConfig scheme = config.scheme;
  scheme.dt = dt;
  const Integrator integrator(table, config.physics, scheme, config.collision.form, exec);

  const std::size_t stride =
      config.output.moment_interval > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(
                                         std::llround(config.output.moment_interval / dt)))
          : 1;
  std::vector<std::size_t> snap_steps;
  for (double t : config.output.snapshot_times) {
    snap_steps.push_back(static_cast<std::size_t>(std::llround(t / dt)));
  }
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

  std::vector<double> exponents = config.output.moment_exponents;
  const auto& law = config.physics.law;
  const auto& mon = config.monitor;

  Trajectory traj;
  traj.dt = dt;
  Spectrum f = initial_spectrum(config, grid);
  for (double v : f.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("run: initial spectrum must be finite and nonnegative");
    }
  }
  std::size_t next_snap = 0;

  auto observe = [&](std::size_t step_index) {
    traj.min_value = std::min(traj.min_value, f.min_value());
    if (step_index % stride == 0 || step_index == steps) {
      auto rec = record_moments(f, law, exponents);
      rec.dissipation = dissipation(f, config.physics);
      traj.moments.push_back(std::move(rec));
    }
    while (next_snap < snap_steps.size() && snap_steps[next_snap] == step_index) {
      traj.snapshots.push_back(f);
      ++next_snap;
    }
    const std::pair<const char*, std::pair<double, double>> checks[] = {
        {"L1_1/3", {1.0 / 3.0, mon.c0}},
        {"L1_1", {1.0, mon.c1}},
        {"L1_N+3", {static_cast<double>(mon.N) + 3.0, mon.c2}},
    };
    for (const auto& [name, nb] : checks) {
      const double v = moment(f, law, nb.first);
      if (v > nb.second) traj.breaches.push_back({f.time, name, v, nb.second});
    }
    for (int n = 1; n <= mon.N; ++n) {
      const double v = moment(f, law, n);
      if (!(v <= mon.ceiling)) {
        throw SimulationAborted("moment M_" + std::to_string(n) + " = " + format_g17(v) +
                                    " exceeded the ceiling " + format_g17(mon.ceiling) +
                                    " at t=" + format_g17(f.time),
                                traj);
      }
    }
  };

  observe(0);
  for (std::size_t s = 1; s <= steps; ++s) {
    StepReport report;
    try {
      f = integrator.step(f, &report);
    } catch (const SimulationAborted&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationAborted(std::string(e.what()), traj);
    }
    f.time = static_cast<double>(s) * dt;
    traj.clipped_mass += report.clipped_mass;
    traj.clipped_energy += report.clipped_energy;
    traj.max_halvings = std::max(traj.max_halvings, report.halvings);
    traj.steps = s;
    observe(s);
  }
  return traj;
}

}  // namespace capwave
