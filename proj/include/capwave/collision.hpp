#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "capwave/dispersion.hpp"
#include "capwave/geometry.hpp"
#include "capwave/grid.hpp"
#include "capwave/kernel.hpp"
#include "capwave/parallel.hpp"
#include "capwave/quadrature.hpp"
#include "capwave/summation.hpp"

namespace capwave {

/// 4 pi / (8 pi sqrt(2 sigma))^2: the collision-rate constant multiplying the
/// reduced kernel squared, so that the default reproduces 4 pi |V|^2.
inline double default_kernel_constant(const DispersionLaw& law) {
  const double pre = kernel_prefactor(law);
  return 4.0 * std::numbers::pi * pre * pre;
}

struct CollisionOptions {
  int quad_order = 4;
  /// Drop every triad with a member outside [k_min, k_max] so that the
  /// represented system exchanges no energy with unresolved scales.
  bool closed_system = false;
  std::optional<double> kernel_constant;  // default_kernel_constant(law) when unset
  /// Power-law continuation of f below k_min (exponent), instead of zero.
  std::optional<double> low_slope;
  /// Geometric cells (ratio 2) covering (0, k_min) in open mode.
  int infrared_cells = 12;
};

/// Off-grid magnitude resolved onto the grid: bracketing cell, log-log
/// interpolation fraction, and the energy-preserving split used when a
/// triad deposits into the cell.
struct PartnerRef {
  static constexpr std::int32_t kBelow = -1;
  static constexpr std::int32_t kAbove = -2;

  std::int32_t lo = kAbove;
  double theta = 0.0;     // ln(x/k_lo) / ln(k_hi/k_lo); extrapolation factor when kBelow
  double alpha_hi = 0.0;  // (E_x - E_lo) / (E_hi - E_lo)

  bool on_grid() const { return lo >= 0; }
};

struct GainTriad {
  std::int32_t a = 0;
  double b_mag = 0.0;
  double c_mag = 0.0;
  PartnerRef b;
  PartnerRef c;
  double weight = 0.0;  // rate per unit f^2 contributed to Q at node a
};

struct LossTriad {
  std::int32_t a = 0;
  double ap_mag = 0.0;  // partner_loss(a, u)
  double u_mag = 0.0;
  PartnerRef ap;
  PartnerRef u;
  double weight = 0.0;  // includes the factor 2 of the absorption term
};

/// Precomputed resonant triads for every grid node.
///
/// Decay triads (node a -> b + c) use the symmetry b <-> c of the decay
/// surface: only c <= b is stored and the weight carries a factor 2. They
/// are shared by the direct and the conservative evaluation. Absorption
/// triads (a + u -> a') serve the direct evaluation only.
class TriadTable {
 public:
  const GridPtr& grid() const { return grid_; }
  const DispersionLaw& law() const { return law_; }
  const CollisionOptions& options() const { return options_; }
  double kernel_constant() const { return kernel_constant_; }
  const std::vector<GainTriad>& gain() const { return gain_; }
  const std::vector<LossTriad>& loss() const { return loss_; }
  const std::vector<std::size_t>& gain_offsets() const { return gain_offsets_; }
  const std::vector<std::size_t>& loss_offsets() const { return loss_offsets_; }
  const std::vector<double>& node_energy() const { return energy_; }
  std::size_t size() const { return gain_.size() + loss_.size(); }

  friend TriadTable build_triad_table(GridPtr grid, const DispersionLaw& law,
                                      const CollisionOptions& options);

 private:
  GridPtr grid_;
  DispersionLaw law_;
  CollisionOptions options_;
  double kernel_constant_ = 0.0;
  std::vector<GainTriad> gain_;
  std::vector<LossTriad> loss_;
  std::vector<std::size_t> gain_offsets_;
  std::vector<std::size_t> loss_offsets_;
  std::vector<double> energy_;
};

namespace detail {

inline PartnerRef resolve(const RadialGrid& grid, const std::vector<double>& energy,
                          double x, double energy_x, const CollisionOptions& opt) {
  PartnerRef ref;
  if (x < grid.k_min()) {
    ref.lo = PartnerRef::kBelow;
    ref.theta = opt.low_slope ? std::pow(x / grid.k_min(), *opt.low_slope) : 0.0;
    return ref;
  }
  const auto j = grid.bracket(x);
  if (!j) return ref;
  const std::size_t lo = *j;
  ref.lo = static_cast<std::int32_t>(lo);
  ref.theta = std::clamp(std::log(x / grid.node(lo)) / std::log(grid.node(lo + 1) / grid.node(lo)),
                         0.0, 1.0);
  ref.alpha_hi = std::clamp((energy_x - energy[lo]) / (energy[lo + 1] - energy[lo]), 0.0, 1.0);
  return ref;
}

// Cell edges for the u-quadrature on [lower, upper]: optional geometric
// cells below k_min, then every grid node strictly inside.
inline std::vector<double> quadrature_edges(const RadialGrid& grid, double lower, double upper,
                                            int infrared_cells) {
  std::vector<double> edges;
  if (!(upper > lower)) return edges;
  edges.push_back(lower);
  if (lower < grid.k_min()) {
    for (int m = infrared_cells; m >= 1; --m) {
      const double e = std::ldexp(grid.k_min(), -m);
      if (e > lower && e < upper) edges.push_back(e);
    }
    if (grid.k_min() < upper) edges.push_back(grid.k_min());
  }
  for (double k : grid.nodes()) {
    if (k > edges.back() && k < upper) edges.push_back(k);
  }
  edges.push_back(upper);
  return edges;
}

}  // namespace detail

/// Resonant-triad table on `grid` for composite Gauss-Legendre quadrature of
/// quad_order nodes per cell in the partner magnitude.
inline TriadTable build_triad_table(GridPtr grid, const DispersionLaw& law,
                                    const CollisionOptions& options = {}) {
  if (!grid) throw std::invalid_argument("build_triad_table: null grid");
  if (grid->dim() != law.dim()) {
    throw std::invalid_argument("build_triad_table: grid and dispersion dimensions differ");
  }
  if (options.quad_order < 1 || options.quad_order > 32) {
    throw std::invalid_argument("build_triad_table: quad_order must lie in [1, 32]");
  }
  TriadTable t;
  t.grid_ = grid;
  t.law_ = law;
  t.options_ = options;
  t.kernel_constant_ = options.kernel_constant.value_or(default_kernel_constant(law));
  if (!(t.kernel_constant_ >= 0.0) || !std::isfinite(t.kernel_constant_)) {
    throw std::invalid_argument("build_triad_table: kernel_constant must be finite and >= 0");
  }

  const RadialGrid& g = *grid;
  const std::size_t n = g.size();
  t.energy_.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.energy_[i] = law.energy(g.node(i));

  const double rate = t.kernel_constant_ * law.angular_factor();
  const auto unit = gauss_legendre_unit(options.quad_order);
  const double lower_open = 0.0;
  const double e_max = law.energy(g.k_max());

  t.gain_offsets_.assign(1, 0);
  t.loss_offsets_.assign(1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g.node(i);
    const double e_a = t.energy_[i];

    // decay surface, c in (lower, u*) with u* the b = c point
    const double u_star = law.energy_inverse(0.5 * e_a);
    const double lower = options.closed_system ? g.k_min() : lower_open;
    const auto gain_edges =
        detail::quadrature_edges(g, lower, u_star, options.infrared_cells);
    for (std::size_t e = 0; e + 1 < gain_edges.size(); ++e) {
      const double lo = gain_edges[e];
      const double width = gain_edges[e + 1] - lo;
      for (const auto& q : unit) {
        const double c = lo + width * q.x;
        if (!(c > 0.0 && c < a)) continue;
        const OnShellTriad tri = make_triad(law, a, c);
        if (options.closed_system && (tri.b < g.k_min() || tri.c < g.k_min())) continue;
        const double e_c = law.energy(c);
        GainTriad gt;
        gt.a = static_cast<std::int32_t>(i);
        gt.b_mag = tri.b;
        gt.c_mag = c;
        gt.b = detail::resolve(g, t.energy_, tri.b, e_a - e_c, options);
        gt.c = detail::resolve(g, t.energy_, c, e_c, options);
        const double v = v_kernel_reduced(law, tri);
        gt.weight = 2.0 * rate * gain_weight(law, c, a) * width * q.w * v * v;
        t.gain_.push_back(gt);
      }
    }
    t.gain_offsets_.push_back(t.gain_.size());

    // absorption surface, u in (lower, upper) with a' = partner_loss(a, u)
    double upper = g.k_max();
    if (options.closed_system) {
      upper = e_max > e_a ? law.energy_inverse(e_max - e_a) : 0.0;
    }
    const auto loss_edges = detail::quadrature_edges(g, lower, upper, options.infrared_cells);
    for (std::size_t e = 0; e + 1 < loss_edges.size(); ++e) {
      const double lo = loss_edges[e];
      const double width = loss_edges[e + 1] - lo;
      for (const auto& q : unit) {
        const double u = lo + width * q.x;
        if (!(u > 0.0)) continue;
        const OnShellTriad tri = make_loss_triad(law, a, u);
        double ap = tri.a;
        if (options.closed_system) {
          if (u < g.k_min()) continue;
          ap = std::min(ap, g.k_max());  // rounding at the top edge
        }
        LossTriad lt;
        lt.a = static_cast<std::int32_t>(i);
        lt.ap_mag = tri.a;
        lt.u_mag = u;
        lt.ap = detail::resolve(g, t.energy_, ap, e_a + law.energy(u), options);
        lt.u = detail::resolve(g, t.energy_, u, law.energy(u), options);
        const double v = v_kernel_reduced(law, tri);
        lt.weight = 2.0 * rate * loss_weight(law, u, a) * width * q.w * v * v;
        t.loss_.push_back(lt);
      }
    }
    t.loss_offsets_.push_back(t.loss_.size());
  }
  if (t.gain_.empty() && t.loss_.empty()) {
    throw std::invalid_argument(
        "build_triad_table: grid too coarse to host any interior quadrature node");
  }
  return t;
}

/// Values of f needed by the triad loops: clamped-at-zero samples and logs.
class SpectrumView {
 public:
  SpectrumView(const std::vector<double>& values, const std::optional<double>& low_slope)
      : low_slope_(low_slope.has_value()) {
    f_.resize(values.size());
    log_f_.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      f_[i] = values[i] > 0.0 ? values[i] : 0.0;
      log_f_[i] = f_[i] > 0.0 ? std::log(f_[i]) : -std::numeric_limits<double>::infinity();
    }
  }

  double node(std::int32_t i) const { return f_[static_cast<std::size_t>(i)]; }

  double at(const PartnerRef& r) const {
    if (r.lo >= 0) {
      const auto j = static_cast<std::size_t>(r.lo);
      if (r.theta <= 0.0) return f_[j];
      if (r.theta >= 1.0) return f_[j + 1];
      if (f_[j] == 0.0 || f_[j + 1] == 0.0) return 0.0;
      return std::exp((1.0 - r.theta) * log_f_[j] + r.theta * log_f_[j + 1]);
    }
    if (r.lo == PartnerRef::kBelow && low_slope_) return f_.front() * r.theta;
    return 0.0;
  }

 private:
  std::vector<double> f_;
  std::vector<double> log_f_;
  bool low_slope_;
};

/// Q = gain - f * loss_rate with gain >= 0 and loss_rate >= 0 pointwise.
struct CollisionSplit {
  std::vector<double> gain;
  std::vector<double> loss_rate;
};

namespace detail {

inline void check_spectrum(const Spectrum& f, const TriadTable& table) {
  if (!f.grid || !table.grid() || !(f.grid == table.grid() || f.grid->same_as(*table.grid()))) {
    throw std::invalid_argument("collision: spectrum and triad table use different grids");
  }
}

[[noreturn]] inline void report_nonfinite(const TriadTable& table, const Spectrum& f,
                                          std::size_t node) {
  const SpectrumView view(f.values, table.options().low_slope);
  std::ostringstream msg;
  msg.precision(17);
  msg << "collision: non-finite contribution at node " << node;
  for (std::size_t t = table.gain_offsets()[node]; t < table.gain_offsets()[node + 1]; ++t) {
    const auto& g = table.gain()[t];
    const double s = g.weight * (view.at(g.b) * view.at(g.c));
    if (!std::isfinite(s) || !std::isfinite(g.weight)) {
      msg << " (decay triad a=" << table.grid()->node(node) << " b=" << g.b_mag
          << " c=" << g.c_mag << ")";
      throw std::runtime_error(msg.str());
    }
  }
  for (std::size_t t = table.loss_offsets()[node]; t < table.loss_offsets()[node + 1]; ++t) {
    const auto& l = table.loss()[t];
    const double s = l.weight * view.at(l.ap) * view.at(l.u);
    if (!std::isfinite(s) || !std::isfinite(l.weight)) {
      msg << " (absorption triad a=" << table.grid()->node(node) << " u=" << l.u_mag
          << " a'=" << l.ap_mag << ")";
      throw std::runtime_error(msg.str());
    }
  }
  msg << " (input f=" << f.values[node] << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace detail

/// Gain/loss-rate decomposition of the direct quadrature of Q.
inline CollisionSplit q_direct_split(const Spectrum& f, const TriadTable& table,
                                     const Execution& exec = {}) {
  detail::check_spectrum(f, table);
  const std::size_t n = f.size();
  const SpectrumView view(f.values, table.options().low_slope);
  CollisionSplit out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const auto& gain = table.gain();
  const auto& loss = table.loss();
  parallel_for(n, exec, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double fa = view.node(static_cast<std::int32_t>(i));
      double g = 0.0, l = 0.0;
      for (std::size_t t = table.gain_offsets()[i]; t < table.gain_offsets()[i + 1]; ++t) {
        const auto& tr = gain[t];
        const double fb = view.at(tr.b);
        const double fc = view.at(tr.c);
        g += tr.weight * fb * fc;
        l += tr.weight * (fb + fc);
      }
      for (std::size_t t = table.loss_offsets()[i]; t < table.loss_offsets()[i + 1]; ++t) {
        const auto& tr = loss[t];
        const double fp = view.at(tr.ap);
        const double fu = view.at(tr.u);
        g += tr.weight * fp * (fa + fu);
        l += tr.weight * fu;
      }
      out.gain[i] = g;
      out.loss_rate[i] = l;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(out.gain[i]) || !std::isfinite(out.loss_rate[i])) {
      detail::report_nonfinite(table, f, i);
    }
  }
  return out;
}

/// Q[f] at the grid nodes by direct quadrature of the decay and absorption
/// surface integrals.
inline std::vector<double> q_direct(const Spectrum& f, const TriadTable& table,
                                    const Execution& exec = {}) {
  const auto split = q_direct_split(f, table, exec);
  std::vector<double> q(f.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = split.gain[i] - std::max(0.0, f.values[i]) * split.loss_rate[i];
  }
  return q;
}

/// Volume-integrated interaction rate R_t of every decay triad, in table order.
inline std::vector<double> triad_rates(const Spectrum& f, const TriadTable& table,
                                       const Execution& exec = {}) {
  detail::check_spectrum(f, table);
  const SpectrumView view(f.values, table.options().low_slope);
  const auto& gain = table.gain();
  std::vector<double> rates(gain.size());
  const auto& vol = table.grid()->volumes();
  parallel_for(f.size(), exec, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double fa = view.node(static_cast<std::int32_t>(i));
      for (std::size_t t = table.gain_offsets()[i]; t < table.gain_offsets()[i + 1]; ++t) {
        const auto& tr = gain[t];
        const double fb = view.at(tr.b);
        const double fc = view.at(tr.c);
        rates[t] = vol[i] * tr.weight * (fb * fc - fa * (fb + fc));
      }
    }
  });
  return rates;
}

/// Q[f] in energy-conservative form.
///
/// Every decay triad a -> b + c adds R_t at node a and removes it from the
/// cells of b and c, split between the two bracketing nodes so that the
/// split reproduces E_b and E_c exactly. Hence sum_i Q_i E_i vol_i = 0 up to
/// rounding for any f. The scatter runs serially in table order, so the
/// result does not depend on the thread count.
inline std::vector<double> q_conservative(const Spectrum& f, const TriadTable& table,
                                          const Execution& exec = {}) {
  const auto rates = triad_rates(f, table, exec);
  const std::size_t n = f.size();
  std::vector<CompensatedSum> acc(n);
  const auto& gain = table.gain();
  auto deposit = [&](const PartnerRef& r, double amount) {
    if (!r.on_grid()) return;
    const auto j = static_cast<std::size_t>(r.lo);
    acc[j].add(-(1.0 - r.alpha_hi) * amount);
    acc[j + 1].add(-r.alpha_hi * amount);
  };
  for (std::size_t t = 0; t < gain.size(); ++t) {
    const double r = rates[t];
    if (!std::isfinite(r)) detail::report_nonfinite(table, f, static_cast<std::size_t>(gain[t].a));
    acc[static_cast<std::size_t>(gain[t].a)].add(r);
    deposit(gain[t].b, r);
    deposit(gain[t].c, r);
  }
  std::vector<double> q(n);
  const auto& vol = table.grid()->volumes();
  for (std::size_t i = 0; i < n; ++i) q[i] = acc[i].value() / vol[i];
  return q;
}

/// sum_t R_t (phi(a) - phi(b) - phi(c)) over the decay triads, with phi
/// evaluated at the exact (off-grid) partner magnitudes.
inline double weak_form(const Spectrum& f, const TriadTable& table,
                        const std::function<double(double)>& phi, const Execution& exec = {}) {
  const auto rates = triad_rates(f, table, exec);
  const auto& gain = table.gain();
  const auto& nodes = table.grid()->nodes();
  std::vector<double> phi_node(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) phi_node[i] = phi(nodes[i]);
  CompensatedSum acc;
  for (std::size_t t = 0; t < gain.size(); ++t) {
    const auto& tr = gain[t];
    acc.add(rates[t] * (phi_node[static_cast<std::size_t>(tr.a)] - phi(tr.b_mag) - phi(tr.c_mag)));
  }
  return acc.value();
}

}  // namespace capwave
