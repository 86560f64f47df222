#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "capwave/dispersion.hpp"
#include "capwave/grid.hpp"
#include "capwave/summation.hpp"

namespace capwave {

/// M_n[f] = sum_i f_i E_i^n vol_i.
inline double moment(const Spectrum& f, const DispersionLaw& law, double n) {
  if (!(n >= 0.0)) throw std::domain_error("moment: exponent must be >= 0");
  const auto& g = *f.grid;
  CompensatedSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double e = law.energy(g.node(i));
    const double w = n == 0.0 ? 1.0 : (n == 1.0 ? e : std::pow(e, n));
    acc.add(f.values[i] * w * g.volume(i));
  }
  return acc.value();
}

struct MomentRecord {
  double time = 0.0;
  std::map<double, double> values;  // exponent -> M_n
  double dissipation = 0.0;         // 2 nu sum_i f_i E_i (k_i^2 + rho k_i^4) vol_i
  double l2 = 0.0;                  // sum_i f_i^2 vol_i

  double at(double n) const {
    auto it = values.find(n);
    if (it == values.end()) throw std::out_of_range("MomentRecord: exponent not recorded");
    return it->second;
  }
};

inline MomentRecord record_moments(const Spectrum& f, const DispersionLaw& law,
                                   const std::vector<double>& exponents) {
  MomentRecord r;
  r.time = f.time;
  for (double n : exponents) r.values[n] = moment(f, law, n);
  CompensatedSum l2;
  for (std::size_t i = 0; i < f.size(); ++i) l2.add(f.values[i] * f.values[i] * f.grid->volume(i));
  r.l2 = l2.value();
  return r;
}

}  // namespace capwave
