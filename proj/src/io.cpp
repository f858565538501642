#include "apmm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace apmm {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<double> parse_numbers(const std::string& text) {
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream is(cleaned);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  return out;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config: expected 'key = value', got '" + line + "'");
    kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) { return parse(read_file(path)); }

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("config: missing key '" + key + "'");
  return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key) const { return std::stod(get(key)); }
double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}
long KeyValueFile::get_int(const std::string& key) const { return std::stol(get(key)); }
long KeyValueFile::get_int_or(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> KeyValueFile::get_list(const std::string& key) const { return parse_numbers(get(key)); }

void KeyValueFile::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) order_.emplace_back(key, value);
  else
    for (auto& e : order_)
      if (e.first == key) e.second = value;
  values_[key] = value;
}

DoubleButcherTableaud parse_tableau(const std::string& text) {
  KeyValueFile kv = KeyValueFile::parse(text);
  DoubleButcherTableaud t;
  t.name = kv.get("name");
  t.stages = kv.get_int("s");
  const Index s = t.stages;
  if (s <= 0) throw std::runtime_error("tableau file: s must be positive");
  auto fill_matrix = [&](const std::string& key) {
    auto vals = kv.get_list(key);
    if (static_cast<Index>(vals.size()) != s * s)
      throw std::runtime_error("tableau file: '" + key + "' needs s*s entries");
    MatrixXd m(s, s);
    for (Index i = 0; i < s * s; ++i) m(i / s, i % s) = vals[i];
    return m;
  };
  auto fill_vector = [&](const std::string& key) {
    auto vals = kv.get_list(key);
    if (static_cast<Index>(vals.size()) != s)
      throw std::runtime_error("tableau file: '" + key + "' needs s entries");
    return Eigen::Map<VectorXd>(vals.data(), s).eval();
  };
  t.a_explicit = fill_matrix("a_explicit");
  t.a_implicit = fill_matrix("a_implicit");
  t.b_explicit = fill_vector("b_explicit");
  t.b_implicit = fill_vector("b_implicit");
  t.c_explicit = kv.has("c_explicit") ? fill_vector("c_explicit") : VectorXd(t.a_explicit.rowwise().sum());
  t.c_implicit = kv.has("c_implicit") ? fill_vector("c_implicit") : VectorXd(t.a_implicit.rowwise().sum());
  return t;
}

DoubleButcherTableaud load_tableau(const std::string& path) { return parse_tableau(read_file(path)); }

MatrixXd load_matrix(const std::string& path) {
  std::istringstream is(read_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto nums = parse_numbers(line);
    if (!nums.empty()) rows.push_back(nums);
  }
  if (rows.empty()) throw std::runtime_error("matrix file '" + path + "' is empty");
  MatrixXd m(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw std::runtime_error("matrix file: ragged rows");
    for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::string format_double(double v) {
  // round-trip exactness: try increasing precision until parsing gives v back
  for (int prec = 15; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) return buf;
  }
  return {};
}

struct SnapshotWriter::Impl {
  std::ofstream out;
};

SnapshotWriter::SnapshotWriter(const std::string& path,
                               const std::vector<std::pair<std::string, std::string>>& metadata)
    : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path);
  if (!impl_->out) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& [k, v] : metadata) impl_->out << "# " << k << " = " << v << "\n";
  impl_->out << "t,x_index,x,rho\n";
}

void SnapshotWriter::row(double t, Index x_index, double x, double rho) {
  impl_->out << format_double(t) << ',' << x_index << ',' << format_double(x) << ',' << format_double(rho)
             << '\n';
}

void SnapshotWriter::close() {
  if (impl_->out.is_open()) impl_->out.close();
}

SnapshotWriter::~SnapshotWriter() { close(); }

void write_convergence_csv(const std::string& path, const std::string& step_label,
                           const std::vector<ConvergenceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "scheme,eps," << step_label << ",L2_error,Linf_error,fitted_slope\n";
  for (const auto& r : rows)
    out << r.scheme << ',' << format_double(r.eps) << ',' << format_double(r.step) << ','
        << format_double(r.l2_error) << ',' << format_double(r.linf_error) << ','
        << format_double(r.fitted_slope) << '\n';
}

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::istringstream is(read_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    // keep the numeric cells of each row; header lines and label columns drop out
    std::vector<double> nums;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const std::string t = trim(cell);
      if (t.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(t.c_str(), &end);
      if (end == t.c_str() + t.size()) nums.push_back(v);
    }
    if (!nums.empty()) rows.push_back(std::move(nums));
  }
  return rows;
}

void write_svg_plot(const std::string& path, const std::string& title, const std::vector<PlotSeries>& series,
                    bool loglog) {
  const double width = 640, height = 480, margin = 60;
  auto tx = [&](double v) { return loglog ? std::log10(v) : v; };
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, tx(s.y[i]));
      ymax = std::max(ymax, tx(s.y[i]));
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double v) { return margin + (tx(v) - xmin) / (xmax - xmin) * (width - 2 * margin); };
  auto py = [&](double v) { return height - margin - (tx(v) - ymin) / (ymax - ymin) * (height - 2 * margin); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title << "</text>\n";
  out << "<rect x='" << margin << "' y='" << margin << "' width='" << width - 2 * margin << "' height='"
      << height - 2 * margin << "' fill='none' stroke='black'/>\n";
  int ci = 0;
  for (const auto& s : series) {
    const char* color = colors[ci % 6];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "'/>\n";
    out << "<text x='" << width - margin + 4 << "' y='" << margin + 16 * (ci + 1)
        << "' font-size='11' fill='" << color << "'>" << s.label << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

}  // namespace apmm
