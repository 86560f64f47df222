#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace capwave {

/// Power-law dispersion E(k) = sqrt(sigma) * k^gamma in dimension d.
///
/// gamma = 3/2 is the capillary-wave law; any gamma in (1, 2] is accepted
/// because the resonance geometry only needs strict convexity.
class DispersionLaw {
 public:
  DispersionLaw() : DispersionLaw(1.5, 1.0, 3) {}

  DispersionLaw(double gamma, double sigma, int dim)
      : gamma_(gamma), sigma_(sigma), sqrt_sigma_(std::sqrt(sigma)), dim_(dim) {
    if (!(gamma > 1.0 && gamma <= 2.0)) {
      throw std::invalid_argument("DispersionLaw: gamma must lie in (1, 2], got " +
                                  std::to_string(gamma));
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw std::invalid_argument("DispersionLaw: sigma must be positive");
    }
    if (dim != 2 && dim != 3) {
      throw std::invalid_argument("DispersionLaw: dim must be 2 or 3");
    }
    kind_ = gamma == 1.5 ? Kind::ThreeHalves : gamma == 2.0 ? Kind::Square : Kind::General;
  }

  double gamma() const { return gamma_; }
  double sigma() const { return sigma_; }
  int dim() const { return dim_; }

  /// Solid angle of the unit sphere in dimension d (2*pi or 4*pi).
  double sphere_area() const { return dim_ == 3 ? 4.0 * M_PI : 2.0 * M_PI; }

  /// Angular factor left after reducing a radial surface integral over the
  /// resonance manifold to a one-dimensional integral: 2*pi for the azimuth
  /// in d = 3, and 2 for the two mirror branches in d = 2.
  double angular_factor() const { return dim_ == 3 ? 2.0 * M_PI : 2.0; }

  double energy(double k) const {
    if (k < 0.0 || std::isnan(k)) {
      throw std::domain_error("energy: negative wavenumber magnitude");
    }
    return sqrt_sigma_ * unit_power(k);
  }

  double energy_inverse(double e) const {
    if (e < 0.0 || std::isnan(e)) {
      throw std::domain_error("energy_inverse: negative energy");
    }
    const double x = e / sqrt_sigma_;
    switch (kind_) {
      case Kind::ThreeHalves:
        return std::cbrt(x * x);
      case Kind::Square:
        return std::sqrt(x);
      case Kind::General:
        break;
    }
    return std::pow(x, 1.0 / gamma_);
  }

  /// k^gamma without the sqrt(sigma) factor.
  double unit_power(double k) const {
    switch (kind_) {
      case Kind::ThreeHalves:
        return k * std::sqrt(k);
      case Kind::Square:
        return k * k;
      case Kind::General:
        break;
    }
    return std::pow(k, gamma_);
  }

  /// b with E(a) = E(b) + E(c), for 0 <= c <= a.
  double partner_gain(double a, double c) const {
    check_pair(a, c);
    if (c > a) {
      throw std::domain_error("partner_gain: c > a has no real resonant partner");
    }
    if (c == 0.0) return a;
    return energy_inverse(std::max(0.0, energy(a) - energy(c)));
  }

  /// a' with E(a') = E(a) + E(c).
  double partner_loss(double a, double c) const {
    check_pair(a, c);
    if (c == 0.0) return a;
    if (a == 0.0) return c;
    return energy_inverse(energy(a) + energy(c));
  }

  /// a - partner_gain(a, c) without cancellation when c << a.
  double gain_gap(double a, double c) const {
    check_pair(a, c);
    if (c > a) {
      throw std::domain_error("gain_gap: c > a has no real resonant partner");
    }
    if (a == 0.0) return 0.0;
    const double r = unit_power(c / a);
    if (r < 0.5) return -a * std::expm1(std::log1p(-r) / gamma_);
    return a - partner_gain(a, c);
  }

  /// partner_loss(a, c) - a without cancellation when c << a.
  double loss_gap(double a, double c) const {
    check_pair(a, c);
    if (a == 0.0) return c;
    const double r = unit_power(c / a);
    if (r < 0.5) return a * std::expm1(std::log1p(r) / gamma_);
    return partner_loss(a, c) - a;
  }

  /// Energy derivative dE/dk.
  double energy_slope(double k) const {
    if (k <= 0.0) return 0.0;
    return gamma_ * energy(k) / k;
  }

 private:
  enum class Kind { ThreeHalves, Square, General };

  static void check_pair(double a, double c) {
    if (a < 0.0 || c < 0.0 || std::isnan(a) || std::isnan(c)) {
      throw std::domain_error("resonant partner: magnitudes must be nonnegative");
    }
  }

  double gamma_;
  double sigma_;
  double sqrt_sigma_;
  int dim_;
  Kind kind_ = Kind::General;
};

}  // namespace capwave
