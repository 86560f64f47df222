// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "capwave/collision.hpp"
#include "capwave/config.hpp"
#include "capwave/diagnostics.hpp"
#include "capwave/evolution.hpp"
#include "capwave/geometry.hpp"
#include "capwave/kernel.hpp"
#include "capwave/oracle_compare.hpp"
#include "capwave/random.hpp"

using namespace capwave;

namespace tol {
constexpr double kEnergyDrift = 1e-8;
constexpr double kBudget = 1e-4;
constexpr double kBudgetHalvingRatio = 3.0;
constexpr double kKzTarget = 4.25;
constexpr double kKzWindow = 0.15;
constexpr double kOracleRel = 0.02;
constexpr double kOracleZ = 3.0;
constexpr int kOracleMinFunctions = 5;
constexpr double kSurfaceSymmetry = 1e-12;
constexpr double kContainmentSlack = 1e-12;
constexpr double kAreaConstancy = 1e-10;
constexpr double kKernelSymmetry = 1e-13;
constexpr double kKernelHomogeneity = 1e-12;
constexpr double kHolder = 1e-12;
constexpr double kQHomogeneity = 1e-12;
}  // namespace tol

namespace {

const Execution kExec{1};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Base setup shared by the evolution criteria: d = 3, 128-node log grid on
// [1e-2, 1e2], closed conservative operator, Gaussian bump, IF-RK4 at dt = 1e-3.
std::string base_config(double nu, double rho, double dt, double t_end, const std::string& extra) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                R"({"physics":{"nu":%.17g,"rho":%.17g,"gamma":1.5,"sigma":1,"dim":3},
  "grid":{"k_min":0.01,"k_max":100,"n":128,"spacing":"log"},
  "scheme":{"type":"rk4_if","dt":%.17g,"t_end":%.17g,"positivity":"clip"},
  "collision":{"form":"conservative","quad_order":4,"closed_system":true},
  "initial":{"type":"gaussian_bump","center":1,"width":0.25,"amplitude":1}%s})",
                nu, rho, dt, t_end, extra.c_str());
  return buf;
}

// Positivity bookkeeping across every evolution run of this binary.
struct PositivityLog {
  double min_value = std::numeric_limits<double>::infinity();
  double clipped_mass = 0.0;
  int runs = 0;
  void add(const Trajectory& t) {
    min_value = std::min(min_value, t.min_value);
    clipped_mass += t.clipped_mass;
    ++runs;
  }
} g_positivity;

Trajectory simulate(const std::string& json) {
  auto traj = run(parse_config(json), kExec);
  g_positivity.add(traj);
  return traj;
}

Outcome energy_conservation() {
  const auto traj = simulate(base_config(0.0, 0.0, 1e-3, 1.0, R"(,"output":{"moment_interval":0.01})"));
  const double m0 = traj.moments.front().at(1.0);
  double drift = 0.0;
  for (const auto& r : traj.moments) drift = std::max(drift, std::abs(r.at(1.0) - m0) / m0);
  const bool active = std::abs(traj.moments.back().l2 - traj.moments.front().l2) >
                      1e-3 * traj.moments.front().l2;
  return {drift <= tol::kEnergyDrift && active,
          fmt("max relative M1 drift %.3g", drift) + fmt(" (bound %.0e)", tol::kEnergyDrift) +
              (active ? "" : ", collisions inactive")};
}

Outcome energy_budget() {
  bool pass = true;
  std::string detail;
  for (double rho : {0.0, 0.5}) {
    double r[2];
    int i = 0;
    for (double dt : {1e-3, 5e-4}) {
      // moments at every step, so the derivative in the residual is as fine as the scheme
      const auto traj = simulate(base_config(0.1, rho, dt, 1.0, ""));
      r[i++] = max_abs(energy_budget_residual(traj));
    }
    const double ratio = r[0] / r[1];
    pass = pass && r[0] <= tol::kBudget && ratio >= tol::kBudgetHalvingRatio;
    detail += fmt("rho=%g: ", rho) + fmt("residual %.3g", r[0]) + fmt(" -> %.3g", r[1]) +
              fmt(" (x%.2f); ", ratio);
  }
  return {pass, detail + fmt("bounds %.0e", tol::kBudget) + fmt(", x%.0f", tol::kBudgetHalvingRatio)};
}

Outcome kz_exponent() {
  std::vector<double> found;
  std::string detail;
  for (std::size_t n : {128, 256, 512}) {
    DispersionLaw law(1.5, 1.0, 2);
    const auto table = build_triad_table(make_grid(1e-2, 1e2, n, Spacing::Log, 2), law, {});
    const auto scan = kz_exponent_scan(table, 3.5, 5.0, 31, 0.1, 10.0, kExec);
    found.push_back(scan.refined);
    detail += fmt("n=%g", static_cast<double>(n)) + fmt(": %.6f ", scan.refined);
  }
  const double err256 = std::abs(found[1] - tol::kKzTarget);
  bool monotone = true;
  for (std::size_t i = 1; i < found.size(); ++i) {
    monotone = monotone &&
               std::abs(found[i] - tol::kKzTarget) <= std::abs(found[i - 1] - tol::kKzTarget);
  }
  return {err256 <= tol::kKzWindow && monotone,
          detail + fmt("| |x-4.25| at n=256 %.2e", err256) + (monotone ? ", monotone" : ", not monotone")};
}

Outcome oracle() {
  OracleSpec spec;
  spec.p = {0.5, 1.0, 2.0};
  spec.epsilon = 0.01;
  spec.samples = 30'000'000;
  spec.u_max_factor = 4.0;
  double worst_rel = 0.0, worst_z = 0.0;
  std::size_t rows = 0;
  bool both_surfaces[2] = {false, false};
  for (int dim : {2, 3}) {
    for (const auto& row : oracle_comparison(DispersionLaw(1.5, 1.0, dim), spec, 1, kExec)) {
      worst_rel = std::max(worst_rel, std::abs(row.rel_err));
      worst_z = std::max(worst_z, std::abs(row.z_score));
      both_surfaces[row.kind == SurfaceKind::Gain ? 0 : 1] = true;
      ++rows;
    }
  }
  const int functions = static_cast<int>(oracle_test_functions().size());
  const bool pass = worst_rel <= tol::kOracleRel && worst_z <= tol::kOracleZ &&
                    functions >= tol::kOracleMinFunctions && both_surfaces[0] && both_surfaces[1];
  return {pass, fmt("%g rows", static_cast<double>(rows)) + fmt(", %g functions", functions) +
                    fmt(", max rel %.3g", worst_rel) + fmt(", max |z| %.2f", worst_z)};
}

Outcome surface_suite() {
  DispersionLaw law3(1.5, 1.0, 3);
  double sym = 0.0, outside = 0.0;
  for (double p : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    for (int i = 0; i <= 400; ++i) {
      const double alpha = i / 400.0;
      const double s = solve_s(law3, alpha, p);
      sym = std::max(sym, std::abs(s - solve_s(law3, 1.0 - alpha, p)) / p);
      const double dist = std::hypot((alpha - 0.5) * p, s);
      outside = std::max(outside, dist / (0.5 * p) - 1.0);
    }
  }
  double spread = 0.0;
  const auto one = [](double) { return 1.0; };
  for (int dim : {2, 3}) {
    DispersionLaw law(1.5, 1.0, dim);
    const double ref = build_weight_table(law, 1.0, SurfaceKind::Gain).integrate(one);
    for (double p : {0.1, 0.3, 3.0, 10.0, 100.0}) {
      const double area = build_weight_table(law, p, SurfaceKind::Gain).integrate(one);
      spread = std::max(spread, std::abs(std::pow(p, law.gamma() - dim) * area - ref) / ref);
    }
  }
  return {sym <= tol::kSurfaceSymmetry && outside <= tol::kContainmentSlack &&
              spread <= tol::kAreaConstancy,
          fmt("symmetry %.2e", sym) + fmt(", ball excess %.2e", std::max(outside, 0.0)) +
              fmt(", normalized area spread %.2e", spread)};
}

Outcome kernel_suite() {
  DispersionLaw law;
  const double pre = kernel_prefactor(law);
  const double bound_constant = 36.0 * pre * pre;
  CounterRng rng(2024);
  double sym = 0.0, worst_bound = 0.0, homog = 0.0;
  const double scale = 10.0;
  const double expected = std::pow(scale, 2.25);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double a = std::pow(10.0, -3.0 + 6.0 * rng.uniform(3 * i));
    const double c = a * std::pow(10.0, -4.0 * rng.uniform(3 * i + 1)) * (1.0 - 1e-9);
    const auto t = make_triad(law, a, c);
    const double v = v_kernel(law, t);
    sym = std::max(sym, std::abs(v - v_kernel(law, t.swapped())) / std::abs(v));
    worst_bound = std::max(worst_bound, v * v / (law.energy(t.a) * law.energy(t.b) * law.energy(t.c)));
    if (c > 1e-2 * a && a < 1e2) {
      const double vs = v_kernel(law, make_triad(law, scale * a, scale * c));
      homog = std::max(homog, std::abs(vs / v - expected) / expected);
    }
  }
  return {sym <= tol::kKernelSymmetry && worst_bound <= bound_constant &&
              homog <= tol::kKernelHomogeneity,
          fmt("symmetry %.2e", sym) + fmt(", max |V|^2/(EEE) / C0 = %.4f", worst_bound / bound_constant) +
              fmt(", homogeneity error %.2e", homog)};
}

Outcome moment_propagation() {
  const auto traj = simulate(base_config(
      0.1, 0.5, 1e-3, 5.0,
      R"(,"output":{"moment_interval":0.01,"moment_exponents":[0.3333333333333333,1,3,6]},
  "monitor":{"c0":100,"c1":100,"c2":1000,"N":3,"ceiling":1e12})"));
  double sup = 0.0;
  for (const auto& r : traj.moments) sup = std::max(sup, r.at(3.0));
  const double first = traj.moments.front().at(3.0);
  const double last = traj.moments.back().at(3.0);
  const bool pass = std::isfinite(sup) && traj.breaches.empty() && last < first;
  return {pass, fmt("sup M3 %.4g", sup) + fmt(", M3(0) %.4g", first) + fmt(", M3(5) %.4g", last) +
                    fmt(", breaches %g", static_cast<double>(traj.breaches.size()))};
}

Outcome holder() {
  CounterRng rng(77);
  const auto grid = make_grid(1e-2, 1e2, 96, Spacing::Log, 3);
  DispersionLaw law;
  double worst = std::numeric_limits<double>::infinity();
  std::uint64_t counter = 0;
  for (int s = 0; s < 100; ++s) {
    auto f = Spectrum::zeros(grid);
    for (auto& v : f.values) {
      const double u = rng.uniform(counter++);
      v = u < 0.2 ? 0.0 : std::exp(-20.0 * rng.uniform(counter++));
    }
    for (int t = 0; t < 10; ++t) {
      double e[3];
      for (double& x : e) x = 4.0 * rng.uniform(counter++);
      std::sort(e, e + 3);
      if (e[1] - e[0] < 1e-3 || e[2] - e[1] < 1e-3) {
        e[1] = e[0] + 0.5;
        e[2] = e[1] + 0.5;
      }
      worst = std::min(worst, holder_check(f, law, e[1], e[0], e[2], tol::kHolder).margin);
    }
  }
  return {worst >= -tol::kHolder, fmt("1000 checks, smallest relative margin %.3g", worst)};
}

Outcome positivity_and_homogeneity() {
  DispersionLaw law;
  const auto grid = make_grid(1e-2, 1e2, 128, Spacing::Log, 3);
  const auto table = build_triad_table(grid, law, {});
  const auto f = Spectrum::sample(grid, [](double k) { return std::exp(-std::pow((k - 1.0) / 0.25, 2)); });
  auto f7 = f;
  for (auto& v : f7.values) v *= 7.0;
  double err = 0.0;
  for (int form = 0; form < 2; ++form) {
    const auto q = form == 0 ? q_conservative(f, table, kExec) : q_direct(f, table, kExec);
    const auto q7 = form == 0 ? q_conservative(f7, table, kExec) : q_direct(f7, table, kExec);
    const double scale = 49.0 * max_abs(q);
    for (std::size_t i = 0; i < q.size(); ++i) err = std::max(err, std::abs(q7[i] - 49.0 * q[i]) / scale);
  }
  const bool positive = g_positivity.min_value >= 0.0 && g_positivity.clipped_mass == 0.0;
  return {positive && err <= tol::kQHomogeneity && g_positivity.runs > 0,
          fmt("%g runs", g_positivity.runs) + fmt(", min f %.3g", g_positivity.min_value) +
              fmt(", clipped mass %.3g", g_positivity.clipped_mass) +
              fmt(", Q[7f] vs 49Q[f] %.2e", err)};
}

Outcome rho_limit() {
  const std::string out = R"(,"output":{"snapshot_times":[1],"moment_interval":0.1})";
  const auto reference = simulate(base_config(0.1, 0.0, 1e-3, 1.0, out)).snapshots.back();
  DispersionLaw law;
  std::vector<double> dist;
  std::string detail;
  for (double rho : {0.1, 0.01}) {
    const auto f = simulate(base_config(0.1, rho, 1e-3, 1.0, out)).snapshots.back();
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      d += std::abs(f.values[i] - reference.values[i]) * law.energy(f.grid->node(i)) * f.grid->volume(i);
    }
    dist.push_back(d);
    detail += fmt("rho=%g: ", rho) + fmt("%.4g; ", d);
  }
  return {dist[0] > dist[1] && dist[1] > 0.0, "E-weighted L1 distance to rho=0 at t=1, " + detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"energy conservation", energy_conservation},
      {"energy budget with damping", energy_budget},
      {"KZ exponent recovery", kz_exponent},
      {"geometry oracle equivalence", oracle},
      {"surface properties", surface_suite},
      {"kernel properties", kernel_suite},
      {"moment propagation", moment_propagation},
      {"Holder moment inequality", holder},
      {"positivity and Q-homogeneity", positivity_and_homogeneity},
      {"rho -> 0 consistency", rho_limit},
  };
  // criterion 9 reads the positivity log, so it runs after every evolution criterion
  const std::vector<std::size_t> order = {0, 1, 2, 3, 4, 5, 6, 7, 9, 8};
  std::vector<std::string> lines(criteria.size());
  int failures = 0;
  for (std::size_t idx : order) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[idx].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    char head[128];
    std::snprintf(head, sizeof head, "%s criterion %zu (%s): ", o.pass ? "PASS" : "FAIL", idx + 1,
                  criteria[idx].first);
    lines[idx] = head + o.detail + fmt(" [%.1fs]", secs);
    std::fprintf(stderr, "%s\n", lines[idx].c_str());
  }
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  return failures == 0 ? 0 : 1;
}
