#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "capwave/diagnostics.hpp"
#include "capwave/geometry.hpp"
#include "capwave/moments.hpp"
#include "capwave/snapshot.hpp"

namespace capwave {

inline constexpr const char* kVersion = "0.1.0";

using HeaderFields = std::vector<std::pair<std::string, std::string>>;

inline std::string format_header(const HeaderFields& fields) {
  std::string out;
  for (const auto& [k, v] : fields) out += "# " + k + "=" + v + "\n";
  return out;
}

inline std::string exponent_label(double n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", n);
  return std::string("M_") + buf;
}

inline std::string format_moments_csv(const std::vector<MomentRecord>& records,
                                      const HeaderFields& header) {
  std::string out = format_header(header);
  out += "time";
  std::vector<double> exps;
  if (!records.empty()) {
    for (const auto& [n, v] : records.front().values) exps.push_back(n);
  }
  for (double n : exps) out += "," + exponent_label(n);
  out += ",dissipation,l2\n";
  for (const auto& r : records) {
    out += format_g17(r.time);
    for (double n : exps) out += "," + format_g17(r.at(n));
    out += "," + format_g17(r.dissipation) + "," + format_g17(r.l2) + "\n";
  }
  return out;
}

inline std::string format_kz_csv(const KzScanResult& scan, const HeaderFields& header) {
  std::string out = format_header(header);
  out += "# refined_exponent=" + format_g17(scan.refined) + "\n";
  out += "# refined_residual=" + format_g17(scan.refined_residual) + "\n";
  out += "exponent,residual,argmin\n";
  for (std::size_t i = 0; i < scan.exponents.size(); ++i) {
    out += format_g17(scan.exponents[i]) + "," + format_g17(scan.residuals[i]) + "," +
           (i == scan.argmin ? "1" : "0") + "\n";
  }
  return out;
}

/// Owns an output directory: writes files, remembers them, and finishes
/// with a MANIFEST.json that says whether the run completed.
class OutputDirectory {
 public:
  OutputDirectory(std::string dir, std::string config_hash, std::string command)
      : dir_(std::move(dir)), hash_(std::move(config_hash)), command_(std::move(command)) {
    std::filesystem::create_directories(dir_);
  }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(dir_) / name).string();
  }

  void write(const std::string& name, const std::string& text) {
    const auto p = path(name);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + p + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + p);
    files_.push_back(name);
  }

  void finish(bool complete, const std::string& error = {}) {
    nlohmann::ordered_json m;
    m["config_hash"] = hash_;
    m["version"] = kVersion;
    m["command"] = command_;
    m["files"] = files_;
    m["complete"] = complete;
    if (!error.empty()) m["error"] = error;
    std::ofstream out(path("MANIFEST.json"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write MANIFEST.json in " + dir_);
    out << m.dump(2) << "\n";
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::string hash_;
  std::string command_;
  std::vector<std::string> files_;
};

}  // namespace capwave
