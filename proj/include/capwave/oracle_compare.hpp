#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "capwave/config.hpp"
#include "capwave/geometry.hpp"

namespace capwave {

struct NamedFunction {
  std::string name;
  std::function<double(double)> fn;
};

inline std::vector<NamedFunction> oracle_test_functions() {
  return {
      {"one", [](double) { return 1.0; }},
      {"u", [](double u) { return u; }},
      {"u^2", [](double u) { return u * u; }},
      {"exp(-u)", [](double u) { return std::exp(-u); }},
      {"1/(1+u)", [](double u) { return 1.0 / (1.0 + u); }},
      {"u*exp(-u)", [](double u) { return u * std::exp(-u); }},
  };
}

struct OracleRow {
  int dim = 3;
  SurfaceKind kind = SurfaceKind::Gain;
  double p = 0.0;
  std::string function;
  double reduced = 0.0;
  double mc = 0.0;
  double std_error = 0.0;
  double rel_err = 0.0;
  double z_score = 0.0;
};

/// Reduced one-dimensional surface integrals against the smeared-delta Monte
/// Carlo estimate, for every p, both surfaces and every test function.
inline std::vector<OracleRow> oracle_comparison(const DispersionLaw& law, const OracleSpec& spec,
                                                std::uint64_t seed, const Execution& exec = {}) {
  const auto named = oracle_test_functions();
  std::vector<std::function<double(double)>> fns;
  for (const auto& nf : named) fns.push_back(nf.fn);
  std::vector<OracleRow> rows;
  std::uint64_t stream = 0;
  for (SurfaceKind kind : {SurfaceKind::Gain, SurfaceKind::Loss}) {
    for (double p : spec.p) {
      const double u_trunc = kind == SurfaceKind::Loss ? spec.u_max_factor * p : 0.0;
      const auto table = build_weight_table(law, p, kind, u_trunc);
      const auto est = mc_surface_oracle(law, p, kind, fns, spec.epsilon, spec.samples,
                                         seed + 0x9E3779B97F4A7C15ULL * ++stream, u_trunc, exec);
      for (std::size_t j = 0; j < named.size(); ++j) {
        OracleRow r;
        r.dim = law.dim();
        r.kind = kind;
        r.p = p;
        r.function = named[j].name;
        r.reduced = table.integrate(named[j].fn);
        r.mc = est[j].value;
        r.std_error = est[j].std_error;
        r.rel_err = std::abs(r.mc - r.reduced) / std::abs(r.reduced);
        r.z_score = r.std_error > 0.0 ? std::abs(r.mc - r.reduced) / r.std_error : 0.0;
        rows.push_back(r);
      }
    }
  }
  return rows;
}

}  // namespace capwave
