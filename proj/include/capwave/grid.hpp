#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "capwave/dispersion.hpp"

namespace capwave {

enum class Spacing { Log, Linear };

inline const char* to_string(Spacing s) { return s == Spacing::Log ? "log" : "linear"; }

/// Discrete wavenumber magnitudes with radial volume weights
/// vol_i ~ |S^{d-1}| k_i^{d-1} dk (trapezoid rule, in ln k for log grids).
class RadialGrid {
 public:
  static RadialGrid make(double k_min, double k_max, std::size_t n, Spacing spacing,
                         int dim) {
    if (!(k_min > 0.0) || !(k_max > k_min) || !std::isfinite(k_max)) {
      throw std::invalid_argument("RadialGrid: need 0 < k_min < k_max");
    }
    if (n < 8) throw std::invalid_argument("RadialGrid: need at least 8 nodes");
    if (dim != 2 && dim != 3) throw std::invalid_argument("RadialGrid: dim must be 2 or 3");
    RadialGrid g;
    g.spacing_ = spacing;
    g.dim_ = dim;
    g.nodes_.resize(n);
    const double last = static_cast<double>(n - 1);
    if (spacing == Spacing::Log) {
      const double span = std::log(k_max / k_min);
      for (std::size_t i = 0; i < n; ++i) {
        g.nodes_[i] = k_min * std::exp(span * static_cast<double>(i) / last);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        g.nodes_[i] = k_min + (k_max - k_min) * static_cast<double>(i) / last;
      }
    }
    g.nodes_.front() = k_min;
    g.nodes_.back() = k_max;
    g.k_min_ = k_min;
    g.k_max_ = k_max;

    const double area = dim == 3 ? 4.0 * M_PI : 2.0 * M_PI;
    g.volumes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double k = g.nodes_[i];
      double width = 0.0;
      if (spacing == Spacing::Log) {
        const double lo = i > 0 ? std::log(k / g.nodes_[i - 1]) : 0.0;
        const double hi = i + 1 < n ? std::log(g.nodes_[i + 1] / k) : 0.0;
        width = 0.5 * (lo + hi) * k;  // dk = k d(ln k)
      } else {
        const double lo = i > 0 ? k - g.nodes_[i - 1] : 0.0;
        const double hi = i + 1 < n ? g.nodes_[i + 1] - k : 0.0;
        width = 0.5 * (lo + hi);
      }
      g.volumes_[i] = area * std::pow(k, dim - 1) * width;
    }
    return g;
  }

  std::size_t size() const { return nodes_.size(); }
  double k_min() const { return k_min_; }
  double k_max() const { return k_max_; }
  Spacing spacing() const { return spacing_; }
  int dim() const { return dim_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& volumes() const { return volumes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double volume(std::size_t i) const { return volumes_[i]; }

  /// Index j with nodes[j] <= x <= nodes[j+1], j in [0, n-2]; nullopt outside.
  std::optional<std::size_t> bracket(double x) const {
    if (!(x >= k_min_ && x <= k_max_)) return std::nullopt;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
    j = j == 0 ? 0 : j - 1;
    return std::min(j, nodes_.size() - 2);
  }

  bool same_as(const RadialGrid& other) const {
    return spacing_ == other.spacing_ && dim_ == other.dim_ && nodes_ == other.nodes_;
  }

 private:
  RadialGrid() = default;

  std::vector<double> nodes_;
  std::vector<double> volumes_;
  double k_min_ = 0.0;
  double k_max_ = 0.0;
  Spacing spacing_ = Spacing::Log;
  int dim_ = 3;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(double k_min, double k_max, std::size_t n, Spacing spacing, int dim) {
  return std::make_shared<const RadialGrid>(RadialGrid::make(k_min, k_max, n, spacing, dim));
}

/// Sampled wave density f(|k|) on a grid at one time.
struct Spectrum {
  GridPtr grid;
  std::vector<double> values;
  double time = 0.0;

  Spectrum() = default;
  Spectrum(GridPtr g, std::vector<double> v, double t = 0.0)
      : grid(std::move(g)), values(std::move(v)), time(t) {
    if (!grid) throw std::invalid_argument("Spectrum: null grid");
    if (values.size() != grid->size()) {
      throw std::invalid_argument("Spectrum: value count does not match grid");
    }
  }

  static Spectrum zeros(GridPtr g, double t = 0.0) {
    const std::size_t n = g->size();
    return Spectrum(std::move(g), std::vector<double>(n, 0.0), t);
  }

  template <typename F>
  static Spectrum sample(GridPtr g, F&& fn, double t = 0.0) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g->node(i));
    return Spectrum(std::move(g), std::move(v), t);
  }

  std::size_t size() const { return values.size(); }
  double min_value() const { return *std::min_element(values.begin(), values.end()); }
};

/// Log-log linear interpolation of f at magnitude x.
///
/// Zero outside [k_min, k_max], except below k_min when low_slope is given:
/// then f(k_min) (x / k_min)^low_slope. A zero bracketing value gives zero
/// strictly inside the cell (the log-log limit).
inline double interpolate_f(const Spectrum& f, double x,
                            std::optional<double> low_slope = std::nullopt) {
  if (x < 0.0 || std::isnan(x)) throw std::domain_error("interpolate_f: x must be >= 0");
  const RadialGrid& g = *f.grid;
  if (x < g.k_min()) {
    if (!low_slope) return 0.0;
    return std::max(0.0, f.values.front()) * std::pow(x / g.k_min(), *low_slope);
  }
  const auto j = g.bracket(x);
  if (!j) return 0.0;
  const double lo = std::max(0.0, f.values[*j]);
  const double hi = std::max(0.0, f.values[*j + 1]);
  const double theta = std::log(x / g.node(*j)) / std::log(g.node(*j + 1) / g.node(*j));
  if (theta <= 0.0) return lo;
  if (theta >= 1.0) return hi;
  if (lo == 0.0 || hi == 0.0) return 0.0;
  return std::exp((1.0 - theta) * std::log(lo) + theta * std::log(hi));
}

}  // namespace capwave
