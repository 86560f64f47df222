#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "capwave/config.hpp"
#include "capwave/diagnostics.hpp"
#include "capwave/evolution.hpp"
#include "capwave/geometry.hpp"
#include "capwave/io.hpp"
#include "capwave/oracle_compare.hpp"

namespace capwave {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> from;
  std::optional<double> to;
  std::optional<int> steps;
};

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Body>
int guarded(OutputDirectory& out, Body&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    out.finish(false, e.what());
    throw;
  }
}

inline HeaderFields run_header(const SimConfig& cfg, const std::string& hash) {
  const auto& law = cfg.physics.law;
  return {{"config_hash", hash},
          {"version", kVersion},
          {"gamma", format_g17(law.gamma())},
          {"sigma", format_g17(law.sigma())},
          {"dim", std::to_string(law.dim())},
          {"nu", format_g17(cfg.physics.nu)},
          {"rho", format_g17(cfg.physics.rho)},
          {"k_min", format_g17(cfg.grid.k_min)},
          {"k_max", format_g17(cfg.grid.k_max)},
          {"n", std::to_string(cfg.grid.n)},
          {"spacing", to_string(cfg.grid.spacing)}};
}

inline void write_simulation(OutputDirectory& out, const Trajectory& traj, const SimConfig& cfg,
                             const std::string& hash) {
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%04zu.csv", i);
    out.write(name, format_snapshot({hash, traj.snapshots[i]}));
  }
  auto header = run_header(cfg, hash);
  header.push_back({"dt", format_g17(traj.dt)});
  header.push_back({"steps", std::to_string(traj.steps)});
  header.push_back({"clipped_mass", format_g17(traj.clipped_mass)});
  header.push_back({"clipped_energy", format_g17(traj.clipped_energy)});
  header.push_back({"max_halvings", std::to_string(traj.max_halvings)});
  header.push_back({"monitor_breaches", std::to_string(traj.breaches.size())});
  out.write("moments.csv", format_moments_csv(traj.moments, header));
  if (!traj.breaches.empty()) {
    std::string text = "time,norm,value,bound\n";
    for (const auto& b : traj.breaches) {
      text += format_g17(b.time) + "," + b.norm + "," + format_g17(b.value) + "," +
              format_g17(b.bound) + "\n";
    }
    out.write("monitor_breaches.csv", text);
  }
}

inline int simulate(const SimConfig& cfg, const std::string& hash, const Execution& exec,
                    std::ostream& log, std::ostream& err) {
  OutputDirectory out(cfg.output.directory, hash, "simulate");
  try {
    const auto traj = run(cfg, exec);
    write_simulation(out, traj, cfg, hash);
    out.finish(true);
    log << "simulate: " << traj.steps << " steps, " << traj.moments.size() << " moment records, "
        << traj.snapshots.size() << " snapshots -> " << cfg.output.directory << "\n";
    return 0;
  } catch (const SimulationAborted& e) {
    write_simulation(out, e.partial(), cfg, hash);
    out.finish(false, e.what());
    err << "simulate aborted: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    out.finish(false, e.what());
    throw;
  }
}

inline int geometry(const SimConfig& cfg, const std::string& hash, std::ostream& log) {
  OutputDirectory out(cfg.output.directory, hash, "geometry");
  return guarded(out, [&] {
    const auto& law = cfg.physics.law;
    std::string curve = format_header(run_header(cfg, hash)) + "p,alpha,s\n";
    std::string weights = format_header(run_header(cfg, hash)) + "surface,p,u,weight\n";
    for (double p : cfg.geometry.p) {
      for (int i = 0; i < cfg.geometry.n_alpha; ++i) {
        const double alpha = static_cast<double>(i) / (cfg.geometry.n_alpha - 1);
        curve += format_g17(p) + "," + format_g17(alpha) + "," + format_g17(solve_s(law, alpha, p)) +
                 "\n";
      }
      for (SurfaceKind kind : {SurfaceKind::Gain, SurfaceKind::Loss}) {
        const auto table = build_weight_table(law, p, kind, cfg.geometry.u_max_factor * p);
        for (const auto& node : table.nodes) {
          weights += std::string(to_string(kind)) + "," + format_g17(p) + "," + format_g17(node.u) +
                     "," + format_g17(node.w) + "\n";
        }
      }
    }
    out.write("s_alpha.csv", curve);
    out.write("weights.csv", weights);
    out.finish(true);
    log << "geometry: wrote s_alpha.csv and weights.csv to " << cfg.output.directory << "\n";
    return 0;
  });
}

inline int kz_scan(const SimConfig& cfg, const std::string& hash, const Execution& exec,
                   std::ostream& log) {
  OutputDirectory out(cfg.output.directory, hash, "kz-scan");
  return guarded(out, [&] {
    auto grid = make_grid(cfg.grid, cfg.physics.law.dim());
    const auto table = build_triad_table(grid, cfg.physics.law, collision_options(cfg));
    const double lo = cfg.kz_scan.band_lo.value_or(10.0 * cfg.grid.k_min);
    const double hi = cfg.kz_scan.band_hi.value_or(0.1 * cfg.grid.k_max);
    const auto scan =
        kz_exponent_scan(table, cfg.kz_scan.from, cfg.kz_scan.to, cfg.kz_scan.steps, lo, hi, exec);
    auto header = run_header(cfg, hash);
    header.push_back({"band_lo", format_g17(lo)});
    header.push_back({"band_hi", format_g17(hi)});
    out.write("kz_scan.csv", format_kz_csv(scan, header));
    out.finish(true);
    log << "kz-scan: argmin exponent " << format_g17(scan.exponents[scan.argmin]) << ", refined "
        << format_g17(scan.refined) << "\n";
    return 0;
  });
}

inline int oracle(const SimConfig& cfg, const std::string& hash, const Execution& exec,
                  std::ostream& log) {
  OutputDirectory out(cfg.output.directory, hash, "oracle");
  return guarded(out, [&] {
    const auto rows = oracle_comparison(cfg.physics.law, cfg.oracle, cfg.seed, exec);
    auto header = run_header(cfg, hash);
    header.push_back({"epsilon", format_g17(cfg.oracle.epsilon)});
    header.push_back({"samples", std::to_string(cfg.oracle.samples)});
    header.push_back({"seed", std::to_string(cfg.seed)});
    std::string text =
        format_header(header) + "dim,surface,p,function,reduced,monte_carlo,std_error,rel_err,z\n";
    double worst_rel = 0.0, worst_z = 0.0;
    for (const auto& r : rows) {
      text += std::to_string(r.dim) + "," + to_string(r.kind) + "," + format_g17(r.p) + "," +
              r.function + "," + format_g17(r.reduced) + "," + format_g17(r.mc) + "," +
              format_g17(r.std_error) + "," + format_g17(r.rel_err) + "," + format_g17(r.z_score) +
              "\n";
      worst_rel = std::max(worst_rel, r.rel_err);
      worst_z = std::max(worst_z, r.z_score);
    }
    out.write("oracle_report.csv", text);
    out.finish(true);
    log << "oracle: " << rows.size() << " comparisons, worst relative error " << worst_rel
        << ", worst z " << worst_z << "\n";
    return 0;
  });
}

}  // namespace detail

/// Entry point of the capwave tool. Returns the process exit code:
/// 0 success, 1 runtime failure, 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& log = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"capwave: radial three-wave kinetic equation solver for capillary waves", "capwave"};
  app.require_subcommand(1);
  CliOptions opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run description")->required();
    sub->add_option("--out", opt.out_dir, "output directory (overrides the config)");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", opt.seed, "seed for the Monte Carlo oracle");
  };
  auto* sim = app.add_subcommand("simulate", "integrate the kinetic equation");
  auto* geo = app.add_subcommand("geometry", "write s(alpha) curves and reduced weight tables");
  auto* kz = app.add_subcommand("kz-scan", "power-law stationarity scan");
  auto* orc = app.add_subcommand("oracle", "compare reduced weights with Monte Carlo");
  for (auto* sub : {sim, geo, kz, orc}) add_common(sub);
  kz->add_option("--from", opt.from, "first exponent");
  kz->add_option("--to", opt.to, "last exponent");
  kz->add_option("--steps", opt.steps, "number of exponents")->check(CLI::Range(3, 100000));

  if (argc > 1 && argv[1][0] != '-') {
    const std::string word = argv[1];
    if (word != "simulate" && word != "geometry" && word != "kz-scan" && word != "oracle") {
      err << "error: unknown subcommand '" << word << "'\n\n" << app.help();
      return 2;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    log << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    const std::string text = detail::read_text(opt.config_path);
    SimConfig cfg = parse_config(text);
    const std::string hash = config_hash(text);
    if (!opt.out_dir.empty()) cfg.output.directory = opt.out_dir;
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.from) cfg.kz_scan.from = *opt.from;
    if (opt.to) cfg.kz_scan.to = *opt.to;
    if (opt.steps) cfg.kz_scan.steps = *opt.steps;
    if (!(cfg.kz_scan.to > cfg.kz_scan.from)) throw std::invalid_argument("--to must exceed --from");
    const Execution exec{opt.threads};
    if (sim->parsed()) return detail::simulate(cfg, hash, exec, log, err);
    if (geo->parsed()) return detail::geometry(cfg, hash, log);
    if (kz->parsed()) return detail::kz_scan(cfg, hash, exec, log);
    return detail::oracle(cfg, hash, exec, log);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace capwave
