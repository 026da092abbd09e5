#pragma once

// CSV output with 17 significant digits (lossless for doubles) and the
// per-run directory layout.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "martensite/diagnostics.hpp"
#include "martensite/errors.hpp"
#include "martensite/evolution.hpp"
#include "martensite/grid.hpp"

namespace martensite {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header)
      : out_(path), columns_(header.size()) {
    if (!out_) throw Error("cannot write " + path.string());
    std::string line;
    for (const auto& h : header) line += (line.empty() ? "" : ",") + h;
    out_ << line << '\n';
  }

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_) throw Error("csv: row width does not match header");
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += format_double(values[i]);
    }
    out_ << line << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

inline void write_diagnostics_csv(const std::filesystem::path& path, const DiagnosticsReport& r) {
  CsvWriter csv(path, {"step", "t", "dt", "sup_abs_S", "grad_norm_sq", "dissipation_integral",
                       "free_energy", "dissipation_residual", "work_rate", "max_principle_excess"});
  for (const auto& s : r.records)
    csv.row({static_cast<double>(s.step), s.t, s.dt, s.sup_abs_S, s.grad_norm_sq,
             s.dissipation_integral, s.free_energy, s.dissipation_residual, s.work_rate,
             s.max_principle_excess});
}

/// Nodal snapshot: x, S, u (3 components), T (Mandel-free components).
inline void write_snapshot_csv(const std::filesystem::path& path, const State& s, const Grid1D& grid) {
  CsvWriter csv(path, {"x", "S", "u1", "u2", "u3", "T11", "T22", "T33", "T12", "T13", "T23"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& u = s.elastic.u[i];
    const auto& T = s.elastic.T[i];
    csv.row({grid.x(i), s.S[i], u(0), u(1), u(2), T.a11, T.a22, T.a33, T.a12, T.a13, T.a23});
  }
}

/// Summary block: one 'name = PASS|FAIL value threshold' line per monitor.
inline void write_summary(const std::filesystem::path& path, const std::vector<MonitorResult>& monitors) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& m : monitors)
    out << m.name << " = " << (m.passed ? "PASS" : "FAIL") << " " << format_double(m.value) << " "
        << format_double(m.threshold) << '\n';
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%05zu.csv", index);
  return buf;
}

}  // namespace martensite
