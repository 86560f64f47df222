#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "capwave/grid.hpp"

namespace capwave {

inline std::string format_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// One spectrum on disk: '#'-prefixed key=value header followed by k,f rows.
struct SnapshotFile {
  std::string config_hash;
  Spectrum spectrum;
};

inline std::string format_snapshot(const SnapshotFile& file) {
  const auto& g = *file.spectrum.grid;
  std::string out;
  out += "# capwave snapshot\n";
  out += "# config_hash=" + file.config_hash + "\n";
  out += "# time=" + format_g17(file.spectrum.time) + "\n";
  out += "# k_min=" + format_g17(g.k_min()) + "\n";
  out += "# k_max=" + format_g17(g.k_max()) + "\n";
  out += "# n=" + std::to_string(g.size()) + "\n";
  out += "# spacing=" + std::string(to_string(g.spacing())) + "\n";
  out += "# dim=" + std::to_string(g.dim()) + "\n";
  out += "k,f\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    out += format_g17(g.node(i)) + "," + format_g17(file.spectrum.values[i]) + "\n";
  }
  return out;
}

inline SnapshotFile parse_snapshot(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> header;
  std::vector<double> ks, fs;
  bool saw_columns = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::size_t start = 1;
      while (start < eq && line[start] == ' ') ++start;
      header[line.substr(start, eq - start)] = line.substr(eq + 1);
      continue;
    }
    if (!saw_columns) {
      if (line != "k,f") throw std::runtime_error("snapshot: expected column line 'k,f'");
      saw_columns = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("snapshot: malformed row at line " + std::to_string(line_no));
    }
    try {
      ks.push_back(std::stod(line.substr(0, comma)));
      fs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error("snapshot: unparseable number at line " + std::to_string(line_no));
    }
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw std::runtime_error(std::string("snapshot: missing header ") + key);
    return it->second;
  };
  const std::string& spacing_text = need("spacing");
  Spacing spacing;
  if (spacing_text == "log") {
    spacing = Spacing::Log;
  } else if (spacing_text == "linear") {
    spacing = Spacing::Linear;
  } else {
    throw std::runtime_error("snapshot: unknown spacing " + spacing_text);
  }
  const auto n = static_cast<std::size_t>(std::stoull(need("n")));
  auto grid = make_grid(std::stod(need("k_min")), std::stod(need("k_max")), n, spacing,
                        std::stoi(need("dim")));
  if (ks.size() != n) throw std::runtime_error("snapshot: row count does not match header n");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(ks[i] - grid->node(i)) > 1e-14 * grid->node(i)) {
      throw std::runtime_error("snapshot: row " + std::to_string(i) +
                               " wavenumber does not match the header grid");
    }
  }
  SnapshotFile file;
  auto hash = header.find("config_hash");
  if (hash != header.end()) file.config_hash = hash->second;
  file.spectrum = Spectrum(std::move(grid), std::move(fs), std::stod(need("time")));
  return file;
}

inline void write_snapshot(const std::string& path, const SnapshotFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << format_snapshot(file);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline SnapshotFile read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_snapshot(ss.str());
}

}  // namespace capwave
