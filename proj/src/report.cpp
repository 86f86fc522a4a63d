#include "igst/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace igst {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw InvalidArgument("row width does not match the header");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::ostringstream os;
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

Table convergence_table(const std::vector<ConvergenceRow>& rows) {
  Table t;
  t.header = {"h_S", "h_T", "r_u", "r_p", "r_T", "c0", "norm_h", "norm_L2_p", "norm_L2_u",
              "observed_order"};
  for (const ConvergenceRow& r : rows)
    t.add_row({format_number(r.h_S), format_number(r.h_T), std::to_string(r.r_u),
               std::to_string(r.r_p), std::to_string(r.r_T), format_number(r.c0),
               format_number(r.norm_h), format_number(r.norm_L2_p), format_number(r.norm_L2_u),
               format_number(r.observed_order)});
  return t;
}

Table series_table(const CutSeries& series) {
  Table t;
  const bool ref = !series.reference.empty();
  t.header = {"s", "value_numeric"};
  if (ref) t.header.push_back("value_reference");
  for (std::size_t i = 0; i < series.s.size(); ++i) {
    std::vector<std::string> row{format_number(series.s[i]), format_number(series.numeric[i])};
    if (ref) row.push_back(format_number(series.reference[i]));
    t.add_row(std::move(row));
  }
  return t;
}

Table stability_table(const std::vector<StabilityRow>& rows) {
  Table t;
  t.header = {"degrees", "r_u", "r_p", "r_T", "tv_p", "overshoot", "std_u2"};
  for (const StabilityRow& r : rows)
    t.add_row({r.label, std::to_string(r.degrees.r_u), std::to_string(r.degrees.r_p),
               std::to_string(r.degrees.r_T), format_number(r.tv_p), format_number(r.overshoot),
               format_number(r.std_u2)});
  return t;
}

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 160, kTop = 40, kBottom = 60;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Axis {
  double lo = 0;
  double hi = 1;
  bool log = false;

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
};

Axis make_axis(const std::vector<PlotSeries>& series, bool use_x, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const PlotSeries& s : series)
    for (double v : use_x ? s.x : s.y) {
      if (!std::isfinite(v) || (log && v <= 0)) continue;
      const double a = log ? std::log10(v) : v;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (log) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
  }
  if (hi - lo < 1e-300) {
    lo -= 0.5;
    hi += 0.5;
  } else if (!log) {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    for (double e = a.lo; e <= a.hi + 1e-9; e += 1) t.push_back(std::pow(10.0, e));
    return t;
  }
  const double raw = (a.hi - a.lo) / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-12 * step; v += step)
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  const Axis ax = make_axis(plot.series, true, plot.log_x);
  const Axis ay = make_axis(plot.series, false, plot.log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + pw * ax.map(v); };
  auto py = [&](double v) { return kTop + ph * (1 - ay.map(v)); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(plot.title) << "</text>\n";
  os << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw)
     << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(ax)) {
    const double x = px(t);
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(x) << "\" y2=\""
       << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + ph + 18) << "\" text-anchor=\"middle\">"
       << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = py(t);
    os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
       << fmt(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">"
       << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 16)
     << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << fmt(kTop + ph / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const PlotSeries& s = plot.series[i];
    const char* color = kColors[i % (sizeof kColors / sizeof kColors[0])];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"6 3\"";
    os << " points=\"";
    bool first = true;
    for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
      if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
      if ((plot.log_x && s.x[j] <= 0) || (plot.log_y && s.y[j] <= 0)) continue;
      os << (first ? "" : " ") << fmt(px(s.x[j])) << "," << fmt(py(s.y[j]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(i);
    os << "<line x1=\"" << fmt(kLeft + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(kLeft + pw + 36)
       << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"6 3\"" : "") << "/>\n";
    os << "<text x=\"" << fmt(kLeft + pw + 42) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

Plot convergence_plot(const std::vector<ConvergenceRow>& rows) {
  Plot p;
  p.title = "Errors under uniform refinement";
  p.x_label = "h_S";
  p.y_label = "error";
  p.log_x = p.log_y = true;
  PlotSeries h{"norm_h", {}, {}, false}, lp{"L2 p", {}, {}, true}, lu{"L2 u", {}, {}, true};
  for (const ConvergenceRow& r : rows) {
    for (PlotSeries* s : {&h, &lp, &lu}) s->x.push_back(r.h_S);
    h.y.push_back(r.norm_h);
    lp.y.push_back(r.norm_L2_p);
    lu.y.push_back(r.norm_L2_u);
  }
  p.series = {h, lp, lu};
  return p;
}

Plot series_plot(const CutSeries& series, const std::string& title) {
  Plot p;
  p.title = title;
  p.x_label = "s";
  p.y_label = series.field;
  p.series.push_back({"numerical", series.s, series.numeric, false});
  if (!series.reference.empty()) p.series.push_back({"reference", series.s, series.reference, true});
  return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
  if (!f) throw ConfigError("failed writing " + path.string());
}

}  // namespace igst
