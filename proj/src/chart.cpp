#include "spectrum/chart.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "spectrum/errors.hpp"

namespace spectrum::chart {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;

  double sx(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double sy(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame make_frame(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double px = 0.02 * (x1 - x0);
  const double py = 0.05 * (y1 - y0);
  return {x0 - px, x1 + px, y0 - py, y1 + py};
}

class Svg {
 public:
  Svg(const std::string& title, const Frame& f, const std::string& xlabel, const std::string& ylabel) : frame_(f) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os_ << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
    axes(xlabel, ylabel);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color, const char* dash = nullptr) {
    os_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (dash) os_ << " stroke-dasharray=\"" << dash << "\"";
    os_ << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      os_ << (i ? " " : "") << fmt(frame_.sx(pts[i].first)) << ',' << fmt(frame_.sy(pts[i].second));
    os_ << "\"/>\n";
  }

  void marker(double x, double y, const char* color, const std::string& label) {
    os_ << "<circle cx=\"" << fmt(frame_.sx(x)) << "\" cy=\"" << fmt(frame_.sy(y)) << "\" r=\"4\" fill=\"" << color
        << "\"/>\n";
    os_ << "<text x=\"" << fmt(frame_.sx(x) + 6) << "\" y=\"" << fmt(frame_.sy(y) - 6) << "\">" << escape(label)
        << "</text>\n";
  }

  void rect(double x0, double y0, double x1, double y1, const char* color) {
    const double left = frame_.sx(x0), right = frame_.sx(x1);
    const double top = frame_.sy(y1), bottom = frame_.sy(y0);
    os_ << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(right - left)
        << "\" height=\"" << fmt(bottom - top) << "\" fill=\"" << color << "\" stroke=\"white\"/>\n";
  }

  void legend(const std::vector<std::pair<std::string, const char*>>& entries) {
    double y = kTop + 8;
    for (const auto& [label, color] : entries) {
      os_ << "<line x1=\"" << kWidth - 190 << "\" y1=\"" << y << "\" x2=\"" << kWidth - 170 << "\" y2=\"" << y
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      os_ << "<text x=\"" << kWidth - 165 << "\" y=\"" << y + 4 << "\">" << escape(label) << "</text>\n";
      y += 16;
    }
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  void axes(const std::string& xlabel, const std::string& ylabel) {
    const double bx = kHeight - kBottom;
    os_ << "<line x1=\"" << kLeft << "\" y1=\"" << bx << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << bx
        << "\" stroke=\"black\"/>\n";
    os_ << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << bx
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = frame_.x0 + (frame_.x1 - frame_.x0) * i / 4.0;
      const double yv = frame_.y0 + (frame_.y1 - frame_.y0) * i / 4.0;
      os_ << "<text x=\"" << fmt(frame_.sx(xv)) << "\" y=\"" << bx + 16 << "\" text-anchor=\"middle\">"
          << tick_label(xv) << "</text>\n";
      os_ << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(frame_.sy(yv) + 4) << "\" text-anchor=\"end\">"
          << tick_label(yv) << "</text>\n";
    }
    os_ << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    os_ << "<text x=\"16\" y=\"" << (kTop + bx) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (kTop + bx) / 2 << ")\">" << escape(ylabel) << "</text>\n";
  }

  Frame frame_;
  std::ostringstream os_;
};

void require_columns(const Table& t, std::initializer_list<const char*> names, const char* kind) {
  if (t.rows() == 0) throw LoadError(std::string(kind) + " series is empty");
  for (const char* n : names)
    if (!t.has(n)) throw LoadError(std::string(kind) + " series needs a '" + n + "' column");
}

}  // namespace

Kind kind_from_string(const std::string& s) {
  if (s == "supply-demand") return Kind::supply_demand;
  if (s == "diffusion") return Kind::diffusion;
  if (s == "mc-histogram") return Kind::mc_histogram;
  throw ValidationError("unknown chart kind '" + s + "'");
}

Table read_series(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  std::size_t row = 0;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      header.push_back(cell);
    }
  }
  if (header.empty()) throw LoadError("series has no header row");
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= header.size()) throw LoadError("too many fields", row);
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
        throw LoadError("non-numeric value '" + cell + "'", row, header[c]);
      cols[c].push_back(v);
      ++c;
    }
    if (c != header.size()) throw LoadError("expected " + std::to_string(header.size()) + " fields", row);
  }
  if (cols.front().empty()) throw LoadError("series is empty");
  Table t;
  for (std::size_t c = 0; c < header.size(); ++c)
    t.add_column(header[c], Eigen::Map<const linalg::Vector>(cols[c].data(), static_cast<Eigen::Index>(cols[c].size())));
  return t;
}

Table read_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");
  return read_series(in);
}

bool find_crossing(const linalg::Vector& grid, const linalg::Vector& a, const linalg::Vector& b, double& at_grid,
                   double& at_value) {
  for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) {
    const double d0 = a(i) - b(i);
    const double d1 = a(i + 1) - b(i + 1);
    if (d0 == 0.0) {
      at_grid = grid(i);
      at_value = a(i);
      return true;
    }
    if ((d0 < 0.0) != (d1 < 0.0) || d1 == 0.0) {
      const double w = d0 / (d0 - d1);
      at_grid = grid(i) + w * (grid(i + 1) - grid(i));
      at_value = a(i) + w * (a(i + 1) - a(i));
      return true;
    }
  }
  return false;
}

std::string render_supply_demand(const Table& s) {
  require_columns(s, {"p", "supply_base", "supply_fee", "demand"}, "supply-demand");
  const auto& p = s.column("p");
  const auto& s0 = s.column("supply_base");
  const auto& s1 = s.column("supply_fee");
  const auto& d = s.column("demand");
  const double qmin = std::min({s0.minCoeff(), s1.minCoeff(), d.minCoeff()});
  const double qmax = std::max({s0.maxCoeff(), s1.maxCoeff(), d.maxCoeff()});
  Svg svg("Licence fee shifts supply", make_frame(qmin, qmax, p.minCoeff(), p.maxCoeff()), "quantity (penetration)",
          "price");
  auto curve = [&](const linalg::Vector& q) {
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index i = 0; i < p.size(); ++i) pts.emplace_back(q(i), p(i));
    return pts;
  };
  svg.polyline(curve(s0), kPalette[0]);
  svg.polyline(curve(s1), kPalette[1]);
  svg.polyline(curve(d), kPalette[2], "6 4");
  double pc = 0.0, qc = 0.0;
  if (find_crossing(p, s0, d, pc, qc)) svg.marker(qc, pc, kPalette[0], "no fee");
  if (find_crossing(p, s1, d, pc, qc)) svg.marker(qc, pc, kPalette[1], "with fee");
  svg.legend({{"supply, no fee", kPalette[0]}, {"supply, with fee", kPalette[1]}, {"demand", kPalette[2]}});
  return svg.finish();
}

std::string render_diffusion(const std::vector<Table>& paths, const std::vector<std::string>& labels) {
  if (paths.empty()) throw LoadError("diffusion chart needs at least one series");
  double t0 = INFINITY, t1 = -INFINITY, q0 = INFINITY, q1 = -INFINITY;
  for (const auto& path : paths) {
    require_columns(path, {"t", "q"}, "diffusion");
    t0 = std::min(t0, path.column("t").minCoeff());
    t1 = std::max(t1, path.column("t").maxCoeff());
    q0 = std::min(q0, path.column("q").minCoeff());
    q1 = std::max(q1, path.column("q").maxCoeff());
  }
  Svg svg("Adoption paths", make_frame(t0, t1, std::min(q0, 0.0), q1), "period", "penetration");
  std::vector<std::pair<std::string, const char*>> legend;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const auto& t = paths[k].column("t");
    const auto& q = paths[k].column("q");
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index i = 0; i < t.size(); ++i) pts.emplace_back(t(i), q(i));
    const char* color = kPalette[k % std::size(kPalette)];
    svg.polyline(pts, color);
    legend.emplace_back(k < labels.size() ? labels[k] : "path " + std::to_string(k + 1), color);
  }
  svg.legend(legend);
  return svg.finish();
}

std::string render_histogram(const Table& series, const std::string& column, int bins) {
  if (series.rows() == 0) throw LoadError("mc-histogram series is empty");
  if (!series.has(column)) throw LoadError("mc-histogram series has no column '" + column + "'");
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  const auto& v = series.column(column);
  double lo = v.minCoeff(), hi = v.maxCoeff();
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    auto b = static_cast<int>((v(i) - lo) / (hi - lo) * bins);
    ++counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))];
  }
  const int top = *std::max_element(counts.begin(), counts.end());
  Svg svg("Replication estimates: " + column, make_frame(lo, hi, 0.0, top), column, "replications");
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b)
    if (counts[static_cast<std::size_t>(b)] > 0)
      svg.rect(lo + b * width, 0.0, lo + (b + 1) * width, counts[static_cast<std::size_t>(b)], kPalette[0]);
  return svg.finish();
}

}  // namespace spectrum::chart
