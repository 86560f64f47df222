#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "capwave/dispersion.hpp"
#include "capwave/parallel.hpp"
#include "capwave/quadrature.hpp"
#include "capwave/random.hpp"

namespace capwave {

/// Gain = decay surface S_p (E(p-w) + E(w) = E(p));
/// Loss = absorption surface S'_p (E(p) + E(w) = E(p+w)).
enum class SurfaceKind { Gain, Loss };

inline const char* to_string(SurfaceKind kind) {
  return kind == SurfaceKind::Gain ? "gain" : "loss";
}

namespace detail {

// Triangle area from its three side lengths (Kahan's ordering), accurate for
// needle-shaped triangles.
inline double triangle_area(double x, double y, double z) {
  double s[3] = {x, y, z};
  std::sort(s, s + 3, std::greater<>());
  const double a = s[0];
  const double b = s[1];
  const double c = s[2];
  const double prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  return prod > 0.0 ? 0.25 * std::sqrt(prod) : 0.0;
}

// Sine of the angle between two sides of lengths x, y opposite side z.
inline double included_sine(double x, double y, double z) {
  return 2.0 * triangle_area(x, y, z) / (x * y);
}

}  // namespace detail

/// H0 evaluated at w = alpha p + s e_q, |e_q| = 1, e_q orthogonal to p.
inline double gain_surface_residual(const DispersionLaw& law, double alpha, double s,
                                    double p_mag) {
  const double to_w = std::hypot(alpha * p_mag, s);
  const double from_w = std::hypot((1.0 - alpha) * p_mag, s);
  return law.energy(from_w) + law.energy(to_w) - law.energy(p_mag);
}

/// Transverse offset s(alpha) of the decay surface S_p.
///
/// Bisection on [0, p sqrt(alpha (1 - alpha))], where H0 changes sign, down to
/// a width of 1e-14 p, followed by two bracketed Newton polish steps.
inline double solve_s(const DispersionLaw& law, double alpha, double p_mag) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error("solve_s: alpha must lie in [0, 1]");
  }
  if (!(p_mag > 0.0) || !std::isfinite(p_mag)) {
    throw std::domain_error("solve_s: p_mag must be positive");
  }
  if (alpha == 0.0 || alpha == 1.0) return 0.0;

  auto residual = [&](double s) { return gain_surface_residual(law, alpha, s, p_mag); };
  double lo = 0.0;
  double hi = p_mag * std::sqrt(alpha * (1.0 - alpha));
  if (residual(hi) < 0.0) hi *= 1.0 + 1e-12;

  constexpr int kMaxIterations = 200;
  int iter = 0;
  while (hi - lo > 1e-14 * p_mag) {
    if (++iter > kMaxIterations) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "solve_s: no convergence, bracket [" << lo << ", " << hi << "] alpha=" << alpha
          << " p=" << p_mag;
      throw std::runtime_error(msg.str());
    }
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  double s = 0.5 * (lo + hi);
  for (int polish = 0; polish < 2; ++polish) {
    const double to_w = std::hypot(alpha * p_mag, s);
    const double from_w = std::hypot((1.0 - alpha) * p_mag, s);
    const double slope =
        s * (law.energy_slope(to_w) / to_w + law.energy_slope(from_w) / from_w);
    if (!(slope > 0.0)) break;
    const double next = s - residual(s) / slope;
    if (next >= lo && next <= hi) s = next;
  }
  return s;
}

/// Reduced density of the decay surface: for radial F,
///   int_{S_p} F(|w|) dsigma / |grad H0| = angular_factor * int_0^p F(u) gain_weight(u, p) du.
///
/// d = 3: u r^{2-gamma} / (gamma sqrt(sigma) p), r = (p^gamma - u^gamma)^{1/gamma}.
/// d = 2: r^{2-gamma} / (gamma sqrt(sigma) p sin(phi)), phi the angle between w and p.
/// Endpoints return the limit; +infinity marks an integrable singularity.
inline double gain_weight(const DispersionLaw& law, double u, double p_mag) {
  if (!(p_mag > 0.0)) throw std::domain_error("gain_weight: p_mag must be positive");
  const double g = law.gamma();
  const double scale = g * std::sqrt(law.sigma()) * p_mag;
  if (u <= 0.0) {
    return law.dim() == 3 ? 0.0 : std::pow(p_mag, 2.0 - g) / scale;
  }
  if (u >= p_mag) {
    if (law.dim() == 3) return g < 2.0 ? 0.0 : p_mag / scale;
    return std::numeric_limits<double>::infinity();
  }
  const double r = law.partner_gain(p_mag, u);
  const double radial = std::pow(r, 2.0 - g);
  if (law.dim() == 3) return u * radial / scale;
  const double sine = detail::included_sine(p_mag, u, r);
  if (!(sine > 0.0)) return std::numeric_limits<double>::infinity();
  return radial / (scale * sine);
}

/// Reduced density of the absorption surface S'_p; same conventions as
/// gain_weight with r = (p^gamma + u^gamma)^{1/gamma}.
inline double loss_weight(const DispersionLaw& law, double u, double p_mag) {
  if (!(p_mag > 0.0)) throw std::domain_error("loss_weight: p_mag must be positive");
  const double g = law.gamma();
  const double scale = g * std::sqrt(law.sigma()) * p_mag;
  if (u <= 0.0) {
    return law.dim() == 3 ? 0.0 : std::pow(p_mag, 2.0 - g) / scale;
  }
  const double r = law.partner_loss(p_mag, u);
  const double radial = std::pow(r, 2.0 - g);
  if (law.dim() == 3) return u * radial / scale;
  const double sine = detail::included_sine(p_mag, u, r);
  if (!(sine > 0.0)) return std::numeric_limits<double>::infinity();
  return radial / (scale * sine);
}

inline double surface_weight(const DispersionLaw& law, SurfaceKind kind, double u,
                             double p_mag) {
  return kind == SurfaceKind::Gain ? gain_weight(law, u, p_mag) : loss_weight(law, u, p_mag);
}

inline bool is_integrable_singularity(double weight) { return std::isinf(weight); }

struct WeightNode {
  double u;
  double w;  // density times quadrature weight
};

struct ReducedWeightTable {
  double p_mag = 0.0;
  SurfaceKind kind = SurfaceKind::Gain;
  double angular_factor = 0.0;
  std::vector<WeightNode> nodes;

  /// angular_factor * sum F(u_i) w_i.
  template <typename F>
  double integrate(F&& fn) const {
    double acc = 0.0;
    for (const auto& n : nodes) acc += fn(n.u) * n.w;
    return angular_factor * acc;
  }
};

/// Composite Gauss-Legendre table on [0, p] (gain) or [0, u_max] (loss),
/// with cells refined geometrically toward the endpoints.
inline ReducedWeightTable build_weight_table(const DispersionLaw& law, double p_mag,
                                             SurfaceKind kind, double u_max = 0.0,
                                             int order = 8, int grading_levels = 40) {
  if (!(p_mag > 0.0)) throw std::domain_error("build_weight_table: p_mag must be positive");
  const double top = kind == SurfaceKind::Gain ? p_mag : u_max;
  if (!(top > 0.0)) {
    throw std::domain_error("build_weight_table: loss tables need u_max > 0");
  }
  std::vector<double> edges{0.0};
  for (int m = grading_levels; m >= 2; --m) edges.push_back(top * std::ldexp(1.0, -m));
  edges.push_back(0.5 * top);
  for (int m = 2; m <= grading_levels; ++m) edges.push_back(top - top * std::ldexp(1.0, -m));
  edges.push_back(top);

  ReducedWeightTable table;
  table.p_mag = p_mag;
  table.kind = kind;
  table.angular_factor = law.angular_factor();
  for (const auto& q : composite_gauss_legendre(edges, order)) {
    table.nodes.push_back({q.x, q.w * surface_weight(law, kind, q.x, p_mag)});
  }
  return table;
}

struct OracleEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
};

/// Smeared-delta Monte Carlo estimate of int F(|w|) delta(H(w)) dw over R^d.
///
/// The delta is replaced by a top-hat of width epsilon * E(p). Samples are
/// uniform in a box enclosing the smeared surface; the loss surface is
/// unbounded, so it is truncated to |w| <= u_trunc (required).
/// Independent of the reduced weights: it only evaluates H.
inline std::vector<OracleEstimate> mc_surface_oracle(
    const DispersionLaw& law, double p_mag, SurfaceKind kind,
    std::span<const std::function<double(double)>> test_fns, double epsilon,
    std::uint64_t n_samples, std::uint64_t seed, double u_trunc = 0.0,
    const Execution& exec = {}) {
  if (!(p_mag > 0.0)) throw std::domain_error("mc_surface_oracle: p_mag must be positive");
  if (!(epsilon > 0.0) || epsilon > 0.05) {
    throw std::domain_error("mc_surface_oracle: epsilon must lie in (0, 0.05]");
  }
  if (n_samples == 0) throw std::domain_error("mc_surface_oracle: need samples");
  if (kind == SurfaceKind::Loss && !(u_trunc > 0.0)) {
    throw std::domain_error(
        "mc_surface_oracle: loss surface is unbounded; a truncation radius is required");
  }
  const int d = law.dim();
  const double width = epsilon * law.energy(p_mag);
  const double energy_p = law.energy(p_mag);

  // Box: axis along p, then d-1 transverse axes.
  double axis_lo = 0.0, axis_hi = 0.0, trans = 0.0;
  if (kind == SurfaceKind::Gain) {
    const double margin = 0.1 * p_mag;
    axis_lo = -margin;
    axis_hi = p_mag + margin;
    trans = 0.5 * p_mag + margin;
  } else {
    // The absorption surface sits at w.p in [0, max_u (|p+w|^2 - p^2 - u^2) / 2p].
    double reach = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      const double u = u_trunc * i / 4000.0;
      const double r = law.energy_inverse(energy_p + law.energy(u));
      reach = std::max(reach, (r * r - p_mag * p_mag - u * u) / (2.0 * p_mag));
    }
    const double margin = 0.25 * p_mag + 0.05 * reach;
    axis_lo = -margin;
    axis_hi = std::min(u_trunc, reach + margin);
    trans = u_trunc;
  }
  double volume = axis_hi - axis_lo;
  for (int i = 1; i < d; ++i) volume *= 2.0 * trans;

  const std::size_t nfn = test_fns.size();
  constexpr std::uint64_t kBlock = 1 << 15;
  const std::uint64_t nblocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<double> sum(nblocks * nfn, 0.0), sum_sq(nblocks * nfn, 0.0);
  std::vector<std::uint64_t> hits(nblocks, 0);
  const CounterRng rng(seed);

  parallel_for(nblocks, exec, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t blk = b0; blk < b1; ++blk) {
      const std::uint64_t first = blk * kBlock;
      const std::uint64_t last = std::min<std::uint64_t>(n_samples, first + kBlock);
      for (std::uint64_t i = first; i < last; ++i) {
        const std::uint64_t ctr = i * 3;
        const double x = axis_lo + (axis_hi - axis_lo) * rng.uniform(ctr);
        const double y = trans * (2.0 * rng.uniform(ctr + 1) - 1.0);
        const double z = d == 3 ? trans * (2.0 * rng.uniform(ctr + 2) - 1.0) : 0.0;
        const double t2 = y * y + z * z;
        const double u = std::sqrt(x * x + t2);
        double h = 0.0;
        if (kind == SurfaceKind::Gain) {
          const double dx = p_mag - x;
          h = law.energy(std::sqrt(dx * dx + t2)) + law.energy(u) - energy_p;
        } else {
          if (u > u_trunc) continue;
          const double sx = p_mag + x;
          h = energy_p + law.energy(u) - law.energy(std::sqrt(sx * sx + t2));
        }
        if (std::abs(h) >= 0.5 * width) continue;
        ++hits[blk];
        for (std::size_t f = 0; f < nfn; ++f) {
          const double v = volume * test_fns[f](u) / width;
          sum[blk * nfn + f] += v;
          sum_sq[blk * nfn + f] += v * v;
        }
      }
    }
  });

  std::vector<OracleEstimate> out(nfn);
  const double n = static_cast<double>(n_samples);
  for (std::size_t f = 0; f < nfn; ++f) {
    double s = 0.0, s2 = 0.0;
    std::uint64_t h = 0;
    for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
      s += sum[blk * nfn + f];
      s2 += sum_sq[blk * nfn + f];
      h += hits[blk];
    }
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    out[f] = {mean, std::sqrt(var / n), h};
  }
  return out;
}

inline OracleEstimate mc_surface_oracle(const DispersionLaw& law, double p_mag,
                                        SurfaceKind kind,
                                        const std::function<double(double)>& test_fn,
                                        double epsilon, std::uint64_t n_samples,
                                        std::uint64_t seed, double u_trunc = 0.0,
                                        const Execution& exec = {}) {
  const std::function<double(double)> fns[] = {test_fn};
  return mc_surface_oracle(law, p_mag, kind, std::span(fns), epsilon, n_samples, seed,
                           u_trunc, exec)[0];
}

}  // namespace capwave
