#include "rmalm/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace rmalm {

MetricsEvaluator::MetricsEvaluator(const StochasticProblem& prob, std::optional<Vector> x_opt,
                                   std::optional<Vector> y_star, std::size_t heldout_samples,
                                   std::uint64_t heldout_seed)
    : prob_(&prob), x_opt_(std::move(x_opt)), y_star_(std::move(y_star)) {
  if (!prob.has_exact_objective()) {
    RngStream rng(heldout_seed, streams::kHeldout);
    heldout_ = prob.sampler->sample_average(heldout_samples, rng);
  }
}

double MetricsEvaluator::objective(const Vector& x) const {
  if (!heldout_) return prob_->objective(x);
  double v = prob_->f0 ? prob_->f0.value(x) : 0.0;
  return v + heldout_->mean_value(x);
}

MetricsRow MetricsEvaluator::row(long k, long cum_inner, const Vector& x, const Vector& y,
                                 const Vector& hvals, double wall_time_s) const {
  MetricsRow r;
  r.k = k;
  r.cum_inner = cum_inner;
  r.obj = objective(x);
  r.avg_viol = average_violation(hvals);
  r.max_viol = max_violation(hvals);
  if (x_opt_) r.dist_sq_x = (x - *x_opt_).squaredNorm();
  if (y_star_) r.dist_sq_y = (y - *y_star_).squaredNorm();
  r.wall_time_s = wall_time_s;
  return r;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {"k",        "cum_inner", "obj",       "avg_viol",
                                                "max_viol", "dist_sq_x", "dist_sq_y", "wall_time_s"};
  return cols;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.k << ',' << r.cum_inner << ',' << format_double(r.obj) << ',' << format_double(r.avg_viol) << ','
        << format_double(r.max_viol) << ',' << opt(r.dist_sq_x) << ',' << opt(r.dist_sq_y) << ','
        << format_double(r.wall_time_s) << '\n';
  }
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write metrics file: " + path);
  write_metrics_csv(out, rows);
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

double parse_number(const std::string& s, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // from_chars rejects "nan"/"inf" spellings produced by some writers
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    std::ostringstream os;
    os << "metrics CSV: bad value '" << s << "' in column " << column << " at line " << line_no;
    fail(ErrorKind::Parse, os.str());
  }
  return v;
}

}  // namespace

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Schema, "metrics CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos[header[i]] = i;
  for (const auto& col : metrics_columns()) {
    if (!pos.count(col)) fail(ErrorKind::Schema, "metrics CSV missing column: " + col);
  }

  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      std::ostringstream os;
      os << "metrics CSV: line " << line_no << " has " << f.size() << " fields, expected " << header.size();
      fail(ErrorKind::Schema, os.str());
    }
    auto get = [&](const char* col) { return parse_number(f[pos.at(col)], line_no, col); };
    auto get_opt = [&](const char* col) -> std::optional<double> {
      const auto& s = f[pos.at(col)];
      if (s.empty()) return std::nullopt;
      return parse_number(s, line_no, col);
    };
    MetricsRow r;
    r.k = static_cast<long>(get("k"));
    r.cum_inner = static_cast<long>(get("cum_inner"));
    r.obj = get("obj");
    r.avg_viol = get("avg_viol");
    r.max_viol = get("max_viol");
    r.dist_sq_x = get_opt("dist_sq_x");
    r.dist_sq_y = get_opt("dist_sq_y");
    r.wall_time_s = get("wall_time_s");
    rows.push_back(r);
  }
  return rows;
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open metrics file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_metrics_csv(buf.str());
}

}  // namespace rmalm
