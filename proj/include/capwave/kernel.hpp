#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "capwave/dispersion.hpp"

namespace capwave {

/// Resonant triad k = k1 + k2, E(k) = E(k1) + E(k2), stored by magnitudes
/// a = |k|, b = |k1|, c = |k2| and the dot products the two constraints imply.
/// gap_b = a - b and gap_c = a - c are carried separately so that nearly
/// collinear triads keep full relative precision.
struct OnShellTriad {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double gap_b = 0.0;
  double gap_c = 0.0;
  double dot_bc = 0.0;  // k1 . k2
  double dot_ab = 0.0;  // k . k1
  double dot_ac = 0.0;  // k . k2

  OnShellTriad swapped() const {
    OnShellTriad t = *this;
    std::swap(t.b, t.c);
    std::swap(t.gap_b, t.gap_c);
    std::swap(t.dot_ab, t.dot_ac);
    return t;
  }
};

namespace detail {

inline OnShellTriad assemble_triad(double a, double b, double c, double gap_b,
                                   double gap_c) {
  OnShellTriad t{a, b, c, gap_b, gap_c, 0.0, 0.0, 0.0};
  // a^2 - b^2 - c^2, expanded around the larger partner
  t.dot_bc = b >= c ? 0.5 * (gap_b * (a + b) - c * c) : 0.5 * (gap_c * (a + c) - b * b);
  t.dot_ab = b * b + t.dot_bc;
  t.dot_ac = c * c + t.dot_bc;
  const double cosine = t.dot_bc / (b * c);
  if (!(std::abs(cosine) <= 1.0 + 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "make_triad: non-realizable triad a=" << a << " b=" << b << " c=" << c
        << " cos=" << cosine;
    throw std::domain_error(msg.str());
  }
  return t;
}

}  // namespace detail

/// Decay triad with |k| = a and |k2| = c; |k1| = partner_gain(a, c).
inline OnShellTriad make_triad(const DispersionLaw& law, double a, double c) {
  if (!(c > 0.0 && c < a) || !std::isfinite(a)) {
    throw std::domain_error("make_triad: requires 0 < c < a");
  }
  const double b = law.partner_gain(a, c);
  if (!(b > 0.0)) throw std::domain_error("make_triad: degenerate partner");
  return detail::assemble_triad(a, b, c, law.gain_gap(a, c), a - c);
}

/// Triad in which the wave of magnitude `a` absorbs c: returns
/// (partner_loss(a, c), a, c), i.e. |k| = a', |k1| = a, |k2| = c.
inline OnShellTriad make_loss_triad(const DispersionLaw& law, double a, double c) {
  if (!(a > 0.0 && c > 0.0) || !std::isfinite(a) || !std::isfinite(c)) {
    throw std::domain_error("make_loss_triad: requires a, c > 0");
  }
  const double gap = law.loss_gap(a, c);
  const double big = a + gap;
  return detail::assemble_triad(big, a, c, gap, big - c);
}

/// L_{x,y} = x . y + |x||y|.
inline double L_pair(double x_mag, double y_mag, double dot_xy) {
  return dot_xy + x_mag * y_mag;
}

/// L_{k,-k1} = |k||k1| - k . k1, written as (c^2 - (a-b)^2)/2 so it stays
/// accurate for nearly collinear triads.
inline double L_k_minus_k1(const OnShellTriad& t) {
  return 0.5 * (t.c - t.gap_b) * (t.c + t.gap_b);
}

inline double L_k_minus_k2(const OnShellTriad& t) {
  return 0.5 * (t.b - t.gap_c) * (t.b + t.gap_c);
}

/// sqrt(E_a E_b E_c) times the bracket of L-ratios, without the
/// 1/(8 pi sqrt(2 sigma)) prefactor.
///
/// The partners are put in a canonical order (larger first) and the two
/// L-ratios that cancel to leading order for c << a are combined
/// analytically, so the result is exactly symmetric under k1 <-> k2.
inline double v_kernel_reduced(const DispersionLaw& law, const OnShellTriad& t) {
  if (!(t.a > 0.0 && t.b > 0.0 && t.c > 0.0)) {
    throw std::domain_error("v_kernel: all magnitudes must be positive");
  }
  const bool b_big = t.b >= t.c;
  const double a = t.a;
  const double big = b_big ? t.b : t.c;
  const double small = b_big ? t.c : t.b;
  const double g = b_big ? t.gap_b : t.gap_c;  // a - big, >= 0

  const double sa = std::sqrt(a);
  const double sb = std::sqrt(big);
  const double sc = std::sqrt(small);
  const double s_sum = sa + sb;
  // L_{k1,k2}/sqrt(a) - L_{k,-k_big... }/sqrt(big), combined
  const double combined =
      (a + big - small) * g * (s_sum * s_sum - small) / (2.0 * sa * sb * s_sum);
  const double side = 0.5 * (small - g) * (small + g) / sc;
  const double bracket = (combined - side) / (sa * sb * sc);
  return std::sqrt(law.energy(a) * law.energy(big) * law.energy(small)) * bracket;
}

inline double kernel_prefactor(const DispersionLaw& law) {
  return 1.0 / (8.0 * std::numbers::pi * std::sqrt(2.0 * law.sigma()));
}

/// Interaction coefficient V_{k,k1,k2} on the resonance manifold.
inline double v_kernel(const DispersionLaw& law, const OnShellTriad& t) {
  return kernel_prefactor(law) * v_kernel_reduced(law, t);
}

inline double v_kernel_sq(const DispersionLaw& law, const OnShellTriad& t) {
  const double v = v_kernel(law, t);
  return v * v;
}

/// Reference evaluation straight from the defining L-ratio formula. Used by
/// tests as an independent route; loses precision for nearly collinear triads.
inline double v_kernel_direct(const DispersionLaw& law, const OnShellTriad& t) {
  const double l12 = L_pair(t.b, t.c, t.dot_bc);
  const double la1 = t.a * t.b - t.dot_ab;
  const double la2 = t.a * t.c - t.dot_ac;
  const double bracket = l12 / (t.a * std::sqrt(t.b * t.c)) -
                         la1 / (t.c * std::sqrt(t.a * t.b)) -
                         la2 / (t.b * std::sqrt(t.a * t.c));
  return kernel_prefactor(law) *
         std::sqrt(law.energy(t.a) * law.energy(t.b) * law.energy(t.c)) * bracket;
}

}  // namespace capwave
