#include "hofid/io.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hofid {

namespace {

const std::vector<std::string>& required_columns() {
  static const std::vector<std::string> cols = {"L",   "lambda", "energy",   "gap",          "F_plus_h",
                                                "chi2", "chi3",  "chi3_abs", "fit_residual", "flag"};
  return cols;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, std::size_t line, const std::string& column) {
  if (text.empty()) throw ParseError(line, "empty value in column '" + column + "'");
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw ParseError(line, "invalid number '" + text + "' in column '" + column + "'");
  }
  return value;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

// Plot frame with linear axes; maps data coordinates to SVG pixels.
struct Frame {
  double x_min, x_max, y_min, y_max;
  static constexpr double width = 800, height = 520, left = 90, right = 150, top = 40, bottom = 70;

  double px(double x) const { return left + (x - x_min) / (x_max - x_min) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom); }

  void pad() {
    if (x_max <= x_min) { x_min -= 0.5; x_max += 0.5; }
    if (y_max <= y_min) { y_min -= 0.5; y_max += 0.5; }
    const double dy = 0.05 * (y_max - y_min);
    y_min -= dy;
    y_max += dy;
  }

  std::string axes(const std::string& x_label, const std::string& y_label, const std::string& title) const {
    std::ostringstream s;
    s << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(title)
      << "</text>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
    char buf[64];
    for (int t = 0; t <= 5; ++t) {
      const double xv = x_min + (x_max - x_min) * t / 5.0;
      const double yv = y_min + (y_max - y_min) * t / 5.0;
      std::snprintf(buf, sizeof buf, "%.4g", xv);
      s << "<line x1=\"" << px(xv) << "\" y1=\"" << height - bottom << "\" x2=\"" << px(xv) << "\" y2=\""
        << height - bottom + 5 << "\" stroke=\"black\"/>\n";
      s << "<text x=\"" << px(xv) << "\" y=\"" << height - bottom + 20 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << buf << "</text>\n";
      std::snprintf(buf, sizeof buf, "%.4g", yv);
      s << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\"" << py(yv)
        << "\" stroke=\"black\"/>\n";
      s << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"12\">" << buf
        << "</text>\n";
    }
    s << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 20
      << "\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(x_label) << "</text>\n";
    s << "<text x=\"20\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" font-size=\"14\" "
      << "transform=\"rotate(-90 20 " << (top + height - bottom) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
    return s.str();
  }
};

std::string svg_open() {
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::width << "\" height=\"" << Frame::height
    << "\" viewBox=\"0 0 " << Frame::width << " " << Frame::height << "\">\n";
  return s.str();
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << r.sites << ',' << format_double(r.lambda) << ',' << format_double(r.energy) << ','
        << format_double(r.gap) << ',' << format_double(r.f_plus_h) << ',' << format_double(r.chi2) << ','
        << format_double(r.chi3) << ',' << format_double(r.chi3_abs) << ',' << format_double(r.fit_residual)
        << ',' << r.flag << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input (missing header)");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (const auto& col : required_columns()) {
    if (!index.count(col)) throw ParseError(line_no, "missing column '" + col + "'");
  }

  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    auto field = [&](const std::string& name) -> const std::string& { return fields[index.at(name)]; };
    SweepRow r;
    const double sites = parse_double(field("L"), line_no, "L");
    if (sites != std::floor(sites) || sites < 0) throw ParseError(line_no, "L must be a non-negative integer");
    r.sites = static_cast<int>(sites);
    r.lambda = parse_double(field("lambda"), line_no, "lambda");
    r.energy = parse_double(field("energy"), line_no, "energy");
    r.gap = parse_double(field("gap"), line_no, "gap");
    r.f_plus_h = parse_double(field("F_plus_h"), line_no, "F_plus_h");
    r.chi2 = parse_double(field("chi2"), line_no, "chi2");
    r.chi3 = parse_double(field("chi3"), line_no, "chi3");
    r.chi3_abs = parse_double(field("chi3_abs"), line_no, "chi3_abs");
    r.fit_residual = parse_double(field("fit_residual"), line_no, "fit_residual");
    r.flag = field("flag");
    if (r.flag.empty()) throw ParseError(line_no, "empty flag");
    rows.push_back(std::move(r));
  }
  return rows;
}

bool is_sweep_quantity(const std::string& q) {
  return q == "energy" || q == "gap" || q == "F_plus_h" || q == "chi2" || q == "chi3" || q == "chi3_abs" ||
         q == "fit_residual";
}

double column_value(const SweepRow& row, const std::string& q) {
  if (q == "energy") return row.energy;
  if (q == "gap") return row.gap;
  if (q == "F_plus_h") return row.f_plus_h;
  if (q == "chi2") return row.chi2;
  if (q == "chi3") return row.chi3;
  if (q == "chi3_abs") return row.chi3_abs;
  if (q == "fit_residual") return row.fit_residual;
  throw std::invalid_argument("unknown quantity '" + q + "'");
}

std::map<int, SweepColumn> columns_by_size(const std::vector<SweepRow>& rows, const std::string& quantity) {
  if (!is_sweep_quantity(quantity)) throw std::invalid_argument("unknown quantity '" + quantity + "'");
  std::map<int, SweepColumn> columns;
  for (const auto& r : rows) {
    const double v = column_value(r, quantity);
    if (!std::isfinite(v)) continue;
    auto& col = columns[r.sites];
    col.lambdas.push_back(r.lambda);
    col.values.push_back(v);
  }
  return columns;
}

nlohmann::json to_json(const PeakRecord& p) {
  return {{"L", p.sites},
          {"lambda_peak", p.lambda_peak},
          {"peak_value", p.peak_value},
          {"grid_index", p.grid_index},
          {"refinement_offset", p.refinement_offset},
          {"prominence", p.prominence}};
}

PeakRecord peak_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("L") || !j.contains("lambda_peak")) {
    throw std::invalid_argument("peak record needs at least 'L' and 'lambda_peak'");
  }
  PeakRecord p;
  p.sites = j.at("L").get<int>();
  p.lambda_peak = j.at("lambda_peak").get<double>();
  p.peak_value = j.value("peak_value", 0.0);
  p.grid_index = j.value("grid_index", std::size_t{0});
  p.refinement_offset = j.value("refinement_offset", 0.0);
  p.prominence = j.value("prominence", 0.0);
  return p;
}

nlohmann::json to_json(const ScalingResult& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : r.points) points.push_back(to_json(p));
  return {{"variable", to_string(r.variable)},
          {"slope", r.slope},
          {"slope_std_error", r.slope_std_error},
          {"lambda_c", r.lambda_c},
          {"intercept_std_error", r.intercept_std_error},
          {"r_squared", r.r_squared},
          {"points", points}};
}

std::string render_sweep_svg(const std::vector<SweepRow>& rows, const std::string& quantity) {
  const auto columns = columns_by_size(rows, quantity);
  if (columns.empty()) throw std::invalid_argument("nothing to plot: no finite '" + quantity + "' values");
  Frame f{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
  for (const auto& [L, col] : columns) {
    for (std::size_t i = 0; i < col.values.size(); ++i) {
      f.x_min = std::min(f.x_min, col.lambdas[i]);
      f.x_max = std::max(f.x_max, col.lambdas[i]);
      f.y_min = std::min(f.y_min, col.values[i]);
      f.y_max = std::max(f.y_max, col.values[i]);
    }
  }
  f.pad();

  std::ostringstream s;
  s << svg_open() << f.axes("lambda", quantity, quantity + " vs lambda");
  std::size_t k = 0;
  for (const auto& [L, col] : columns) {
    const char* color = kPalette[k % kPalette.size()];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < col.values.size(); ++i) {
      s << (i ? " " : "") << f.px(col.lambdas[i]) << ',' << f.py(col.values[i]);
    }
    s << "\"><title>L=" << L << "</title></polyline>\n";
    const double ly = Frame::top + 20.0 * static_cast<double>(k);
    s << "<line x1=\"" << Frame::width - Frame::right + 15 << "\" y1=\"" << ly << "\" x2=\""
      << Frame::width - Frame::right + 40 << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << Frame::width - Frame::right + 45 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">L=" << L
      << "</text>\n";
    ++k;
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_scaling_svg(const ScalingResult& r) {
  if (r.points.empty()) throw std::invalid_argument("nothing to plot: scaling result has no points");
  Frame f{0.0, 0.0, r.lambda_c, r.lambda_c};
  for (const auto& p : r.points) {
    const double x = scaling_abscissa(r.variable, p.sites);
    f.x_max = std::max(f.x_max, x);
    f.y_min = std::min(f.y_min, p.lambda_peak);
    f.y_max = std::max(f.y_max, p.lambda_peak);
  }
  f.x_max *= 1.1;
  f.pad();

  const std::string x_label = r.variable == ScalingVariable::inv_L ? "1/L" : "1/L^2";
  std::ostringstream s;
  s << svg_open() << f.axes(x_label, "lambda_peak", "finite-size scaling of peak positions");
  s << "<line x1=\"" << f.px(0.0) << "\" y1=\"" << f.py(r.lambda_c) << "\" x2=\"" << f.px(f.x_max) << "\" y2=\""
    << f.py(r.lambda_c + r.slope * f.x_max) << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
  for (const auto& p : r.points) {
    const double x = scaling_abscissa(r.variable, p.sites);
    s << "<circle cx=\"" << f.px(x) << "\" cy=\"" << f.py(p.lambda_peak) << "\" r=\"4\" fill=\"#1f77b4\"><title>L="
      << p.sites << "</title></circle>\n";
  }
  s << "<rect x=\"" << f.px(0.0) - 5 << "\" y=\"" << f.py(r.lambda_c) - 5
    << "\" width=\"10\" height=\"10\" fill=\"#d62728\"/>\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "lambda_c = %.4f +- %.4f", r.lambda_c, r.intercept_std_error);
  s << "<text x=\"" << f.px(0.0) + 12 << "\" y=\"" << f.py(r.lambda_c) - 10 << "\" font-size=\"13\">" << buf
    << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace hofid
