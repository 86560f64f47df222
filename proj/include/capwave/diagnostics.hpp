#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "capwave/collision.hpp"
#include "capwave/evolution.hpp"
#include "capwave/moments.hpp"

namespace capwave {

struct HolderResult {
  bool holds = false;
  double lhs = 0.0;     // M_n
  double rhs = 0.0;     // M_p^((M-n)/(M-p)) M_M^((n-p)/(M-p))
  double margin = 0.0;  // (rhs - lhs) / max(|rhs|, tiny); >= -tolerance when it holds
};

/// Checks M_n <= M_p^((M-n)/(M-p)) M_M^((n-p)/(M-p)) for M > n > p >= 0.
inline HolderResult holder_check(const Spectrum& f, const DispersionLaw& law, double n, double p,
                                 double m, double tolerance = 1e-12) {
  if (!(m > n && n > p && p >= 0.0)) {
    throw std::invalid_argument("holder_check: requires M > n > p >= 0");
  }
  if (f.min_value() < 0.0) throw std::invalid_argument("holder_check: spectrum has negative values");
  HolderResult r;
  r.lhs = moment(f, law, n);
  const double mp = moment(f, law, p);
  const double mm = moment(f, law, m);
  r.rhs = std::pow(mp, (m - n) / (m - p)) * std::pow(mm, (n - p) / (m - p));
  const double scale = std::max(std::abs(r.rhs), std::numeric_limits<double>::min());
  r.margin = (r.rhs - r.lhs) / scale;
  r.holds = r.margin >= -tolerance;
  return r;
}

/// r(t_i) = dM_1/dt + dissipation, by centered differences over the
/// recorded moments, normalized by M_1(0) / t_end. Returns one value per
/// interior record.
inline std::vector<double> energy_budget_residual(const Trajectory& traj) {
  const auto& m = traj.moments;
  if (m.size() < 3) throw std::invalid_argument("energy_budget_residual: needs >= 3 records");
  const double t_end = m.back().time - m.front().time;
  const double m0 = m.front().at(1.0);
  if (!(t_end > 0.0)) throw std::invalid_argument("energy_budget_residual: zero time span");
  const double scale = m0 > 0.0 ? m0 / t_end : 1.0;
  std::vector<double> r;
  r.reserve(m.size() - 2);
  for (std::size_t i = 1; i + 1 < m.size(); ++i) {
    const double h0 = m[i].time - m[i - 1].time;
    const double h1 = m[i + 1].time - m[i].time;
    if (!(h0 > 0.0 && h1 > 0.0)) {
      throw std::invalid_argument("energy_budget_residual: times must increase strictly");
    }
    const double y0 = m[i - 1].at(1.0), y1 = m[i].at(1.0), y2 = m[i + 1].at(1.0);
    const double d = (-h1 / (h0 * (h0 + h1))) * y0 + ((h1 - h0) / (h0 * h1)) * y1 +
                     (h0 / (h1 * (h0 + h1))) * y2;
    r.push_back((d + m[i].dissipation) / scale);
  }
  return r;
}

inline double max_abs(const std::vector<double>& v) {
  double out = 0.0;
  for (double x : v) out = std::max(out, std::abs(x));
  return out;
}

/// Smallest c1 with sum f^2 vol (t) <= sum f^2 vol (0) e^{c1 t} along the
/// recorded moments; a finite value means no L^2 blow-up was seen.
inline double l2_growth_rate(const Trajectory& traj) {
  const auto& m = traj.moments;
  if (m.empty() || !(m.front().l2 > 0.0)) return 0.0;
  double c1 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < m.size(); ++i) {
    const double dt = m[i].time - m.front().time;
    if (dt > 0.0) c1 = std::max(c1, std::log(m[i].l2 / m.front().l2) / dt);
  }
  return std::isfinite(c1) ? c1 : 0.0;
}

struct KzScanResult {
  std::vector<double> exponents;
  std::vector<double> residuals;
  std::size_t argmin = 0;  // index into the scan
  double refined = 0.0;    // minimizer after golden-section refinement
  double refined_residual = 0.0;
};

/// ||Q[k^-x]|| / ||gain[k^-x]|| over the band nodes (discrete l2).
inline double kz_residual(const TriadTable& table, double x, double band_lo, double band_hi,
                          const Execution& exec = {}) {
  const auto& grid = table.grid();
  const auto f = Spectrum::sample(grid, [x](double k) { return std::pow(k, -x); });
  const auto split = q_direct_split(f, table, exec);
  CompensatedSum num, den;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double k = grid->node(i);
    if (k < band_lo || k > band_hi) continue;
    const double q = split.gain[i] - f.values[i] * split.loss_rate[i];
    num.add(q * q);
    den.add(split.gain[i] * split.gain[i]);
  }
  if (!(den.value() > 0.0)) throw std::runtime_error("kz_residual: band has no gain");
  return std::sqrt(num.value() / den.value());
}

/// Stationarity scan of pure power laws over [from, to] in `steps` points.
/// The band must stay at least a decade inside the grid at both ends.
inline KzScanResult kz_exponent_scan(const TriadTable& table, double from, double to, int steps,
                                     double band_lo, double band_hi, const Execution& exec = {}) {
  const auto& grid = *table.grid();
  if (!(band_lo > 0.0 && band_hi > band_lo)) throw std::invalid_argument("kz_exponent_scan: bad band");
  if (band_lo < 10.0 * grid.k_min() * (1.0 - 1e-12) || band_hi > 0.1 * grid.k_max() * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "kz_exponent_scan: band must stay a decade inside the grid at both ends");
  }
  if (!(to > from) || steps < 3) throw std::invalid_argument("kz_exponent_scan: bad exponent range");
  KzScanResult r;
  for (int s = 0; s < steps; ++s) {
    const double x = from + (to - from) * s / (steps - 1);
    r.exponents.push_back(x);
    r.residuals.push_back(kz_residual(table, x, band_lo, band_hi, exec));
  }
  r.argmin = static_cast<std::size_t>(
      std::min_element(r.residuals.begin(), r.residuals.end()) - r.residuals.begin());
  double a = r.exponents[r.argmin == 0 ? 0 : r.argmin - 1];
  double b = r.exponents[std::min(r.argmin + 1, r.exponents.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = kz_residual(table, c, band_lo, band_hi, exec);
  double fd = kz_residual(table, d, band_lo, band_hi, exec);
  while (b - a > 1e-6) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = kz_residual(table, c, band_lo, band_hi, exec);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = kz_residual(table, d, band_lo, band_hi, exec);
    }
  }
  r.refined = 0.5 * (a + b);
  r.refined_residual = kz_residual(table, r.refined, band_lo, band_hi, exec);
  if (r.residuals[r.argmin] < r.refined_residual) {
    r.refined = r.exponents[r.argmin];
    r.refined_residual = r.residuals[r.argmin];
  }
  return r;
}

}  // namespace capwave
