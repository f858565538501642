#pragma once

// File formats: flat key-value config files, plain-text tableau and matrix
// files, CSV emission for snapshots and convergence tables, and small SVG
// line plots rendered from the same data.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apmm/tableau.hpp"
#include "apmm/types.hpp"

namespace apmm {

// "key = value" lines; '#' starts a comment; later keys override earlier ones.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int_or(const std::string& key, long fallback) const;
  std::vector<double> get_list(const std::string& key) const;  // comma or space separated
  void set(const std::string& key, const std::string& value);
  const std::vector<std::pair<std::string, std::string>>& entries() const { return order_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, std::string>> order_;
};

// User-supplied tableau: name, s, and row-major coefficient lists
// (a_explicit, a_implicit, b_explicit, b_implicit; c vectors optional and
// derived from the row sums when absent).
DoubleButcherTableaud load_tableau(const std::string& path);
DoubleButcherTableaud parse_tableau(const std::string& text);

// Whitespace-separated dense matrix, one row per line.
MatrixXd load_matrix(const std::string& path);

// Snapshot CSV: '#'-prefixed metadata echo, then "t,x_index,x,rho" rows with
// shortest round-trip formatting.
struct SnapshotWriter {
  explicit SnapshotWriter(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& metadata);
  void row(double t, Index x_index, double x, double rho);
  void close();
  ~SnapshotWriter();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ConvergenceRow {
  std::string scheme;
  double eps;
  double step;  // dt or n_x
  double l2_error;
  double linf_error;
  double fitted_slope;
};

void write_convergence_csv(const std::string& path, const std::string& step_label,
                           const std::vector<ConvergenceRow>& rows);

// Reads back a numeric CSV (skipping '#' and header lines); used by the
// round-trip tests and the plotter.
std::vector<std::vector<double>> read_csv(const std::string& path);

std::string format_double(double v);  // shortest representation that round-trips

// Minimal static plot: polyline per series, optional log-log axes.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
void write_svg_plot(const std::string& path, const std::string& title, const std::vector<PlotSeries>& series,
                    bool loglog);

}  // namespace apmm
