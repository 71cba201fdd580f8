#include "fmtl/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace fmtl {

std::string Regime::title() const {
  std::ostringstream os;
  os << to_string(design) << " design, n_t = " << n_t << ", m_t = " << m_t;
  return os.str();
}

std::string Regime::file_stem() const {
  std::ostringstream os;
  os << "boxplot_" << to_string(design) << "_nt" << n_t << "_mt" << m_t;
  return os.str();
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
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

double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    if (f * mag >= raw) return f * mag;
  }
  return 10.0 * mag;
}

void svg_open(std::ostringstream& os, double w, double h) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
     << "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" "
        "\"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w)
     << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" fill=\"white\"/>\n";
}

void text(std::ostringstream& os, double x, double y, const std::string& s,
          const char* anchor = "middle", int size = 12, double rotate = 0.0) {
  os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\""
     << size << "\" text-anchor=\"" << anchor << '"';
  if (rotate != 0.0) {
    os << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' ' << num(y) << ")\"";
  }
  os << '>' << escape(s) << "</text>\n";
}

void line(std::ostringstream& os, double x1, double y1, double x2, double y2,
          const char* stroke = "black", double width = 1.0) {
  os << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\""
     << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
}

std::string box_label(const Cell& c) {
  if (!c.sizes.has_sources()) return "baseline";
  return "n_s=" + std::to_string(c.sizes.n_s) + " m_s=" + std::to_string(c.sizes.m_s);
}

}  // namespace

std::vector<Regime> group_regimes(const std::vector<ResultRow>& rows,
                                  const std::vector<Cell>& expected) {
  using RegimeKey = std::tuple<int, int, int>;
  using BoxKey = std::tuple<int, int, int, int>;  // baseline first via has_sources
  std::map<RegimeKey, std::map<BoxKey, std::pair<Cell, std::vector<double>>>> groups;

  auto regime_key = [](const Cell& c) {
    return RegimeKey{static_cast<int>(c.design), c.sizes.n_t, c.sizes.m_t};
  };
  auto box_key = [](const Cell& c) {
    return BoxKey{c.sizes.has_sources() ? 1 : 0, c.sizes.n_s, c.sizes.m_s, c.sizes.K};
  };

  for (const Cell& c : expected) groups[regime_key(c)][box_key(c)].first = c;
  for (const ResultRow& r : rows) {
    const auto rk = regime_key(r.cell);
    if (!expected.empty()) {
      auto it = groups.find(rk);
      if (it == groups.end() || !it->second.count(box_key(r.cell))) continue;
    }
    auto& slot = groups[rk][box_key(r.cell)];
    slot.first = r.cell;
    slot.second.push_back(r.imse);
  }

  std::vector<Regime> out;
  for (auto& [rk, boxes] : groups) {
    Regime regime;
    regime.design = static_cast<DesignKind>(std::get<0>(rk));
    regime.n_t = std::get<1>(rk);
    regime.m_t = std::get<2>(rk);
    for (auto& [bk, slot] : boxes) {
      if (slot.second.empty()) {
        throw std::runtime_error("no results for cell " + slot.first.label());
      }
      regime.boxes.push_back({box_label(slot.first), summarize(slot.second)});
    }
    out.push_back(std::move(regime));
  }
  return out;
}

std::string boxplot_svg(const Regime& regime) {
  const double left = 70.0, right = 20.0, top = 40.0, bottom = 120.0;
  const double slot = 44.0;
  const double plot_w = slot * static_cast<double>(std::max<std::size_t>(regime.boxes.size(), 1));
  const double plot_h = 320.0;
  const double w = left + plot_w + right, h = top + plot_h + bottom;

  double hi = 0.0;
  for (const Box& b : regime.boxes) hi = std::max(hi, b.risk.max);
  if (!(hi > 0.0)) hi = 1.0;
  const double step = nice_step(hi, 5);
  const double y_max = std::ceil(hi / step) * step;
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / y_max); };

  std::ostringstream os;
  svg_open(os, w, h);
  text(os, w / 2, 22, regime.title(), "middle", 14);
  for (double v = 0.0; v <= y_max + step * 1e-9; v += step) {
    line(os, left, y_of(v), left + plot_w, y_of(v), "#dddddd");
    text(os, left - 6, y_of(v) + 4, tick_label(v), "end", 11);
  }
  line(os, left, top, left, top + plot_h);
  line(os, left, top + plot_h, left + plot_w, top + plot_h);
  text(os, 18, top + plot_h / 2, "IMSE", "middle", 12, -90.0);

  for (std::size_t i = 0; i < regime.boxes.size(); ++i) {
    const Box& b = regime.boxes[i];
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    const double half = slot * 0.3;
    const char* fill = b.label == "baseline" ? "#f4cccc" : "#cfe2f3";
    line(os, cx, y_of(b.risk.min), cx, y_of(b.risk.q1));
    line(os, cx, y_of(b.risk.q3), cx, y_of(b.risk.max));
    line(os, cx - half / 2, y_of(b.risk.min), cx + half / 2, y_of(b.risk.min));
    line(os, cx - half / 2, y_of(b.risk.max), cx + half / 2, y_of(b.risk.max));
    os << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(y_of(b.risk.q3)) << "\" width=\""
       << num(2 * half) << "\" height=\"" << num(y_of(b.risk.q1) - y_of(b.risk.q3))
       << "\" fill=\"" << fill << "\" stroke=\"black\"/>\n";
    line(os, cx - half, y_of(b.risk.median), cx + half, y_of(b.risk.median), "black", 2.0);
    text(os, cx, top + plot_h + 12, b.label, "end", 10, -60.0);
  }
  os << "</svg>\n";
  return os.str();
}

std::string rates_svg(const std::vector<RateStudy>& studies) {
  const double left = 70.0, right = 260.0, top = 40.0, bottom = 50.0;
  const double plot_w = 420.0, plot_h = 320.0;
  const double w = left + plot_w + right, h = top + plot_h + bottom;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
  for (const RateStudy& s : studies) {
    Series se{s.name, {}};
    for (const RatePoint& p : s.points) {
      double mean = 0.0;
      for (double v : p.imse) mean += v;
      mean /= static_cast<double>(std::max<std::size_t>(p.imse.size(), 1));
      if (!(p.size > 0.0) || !(mean > 0.0)) continue;
      const double lx = std::log10(p.size), ly = std::log10(mean);
      se.pts.emplace_back(lx, ly);
      lx0 = std::min(lx0, lx), lx1 = std::max(lx1, lx);
      ly0 = std::min(ly0, ly), ly1 = std::max(ly1, ly);
    }
    series.push_back(std::move(se));
  }
  if (lx0 > lx1) lx0 = 0, lx1 = 1, ly0 = 0, ly1 = 1;
  lx0 = std::floor(lx0), lx1 = std::max(std::ceil(lx1), lx0 + 1);
  ly0 = std::floor(ly0), ly1 = std::max(std::ceil(ly1), ly0 + 1);
  auto x_of = [&](double lx) { return left + plot_w * (lx - lx0) / (lx1 - lx0); };
  auto y_of = [&](double ly) { return top + plot_h * (1.0 - (ly - ly0) / (ly1 - ly0)); };

  std::ostringstream os;
  svg_open(os, w, h);
  text(os, left + plot_w / 2, 22, "Empirical rates (mean IMSE, log-log)", "middle", 14);
  for (double d = lx0; d <= lx1 + 1e-9; d += 1.0) {
    line(os, x_of(d), top, x_of(d), top + plot_h, "#dddddd");
    text(os, x_of(d), top + plot_h + 16, "1e" + tick_label(d), "middle", 11);
  }
  // Round-off sized values can stretch the y-range over dozens of decades.
  const double ystep = std::max(1.0, std::ceil((ly1 - ly0) / 8.0));
  for (double d = ly0; d <= ly1 + 1e-9; d += ystep) {
    line(os, left, y_of(d), left + plot_w, y_of(d), "#dddddd");
    text(os, left - 6, y_of(d) + 4, "1e" + tick_label(d), "end", 11);
  }
  line(os, left, top, left, top + plot_h);
  line(os, left, top + plot_h, left + plot_w, top + plot_h);
  text(os, left + plot_w / 2, h - 10, "sample size", "middle", 12);
  text(os, 18, top + plot_h / 2, "IMSE", "middle", 12, -90.0);

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const char* color = colors[i % 5];
    if (!s.pts.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < s.pts.size(); ++k) {
        os << (k ? " " : "") << num(x_of(s.pts[k].first)) << ',' << num(y_of(s.pts[k].second));
      }
      os << "\"/>\n";
      for (const auto& [lx, ly] : s.pts) {
        os << "<circle cx=\"" << num(x_of(lx)) << "\" cy=\"" << num(y_of(ly))
           << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    std::string legend = s.name;
    if (s.pts.size() >= 3) {
      std::vector<std::pair<double, double>> raw;
      for (const auto& [lx, ly] : s.pts) raw.emplace_back(std::pow(10.0, lx), std::pow(10.0, ly));
      char buf[32];
      std::snprintf(buf, sizeof buf, " (slope %.2f)", rate_slope(raw));
      legend += buf;
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(i);
    line(os, left + plot_w + 12, ly - 4, left + plot_w + 30, ly - 4, color, 2.0);
    text(os, left + plot_w + 34, ly, legend, "start", 11);
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> write_boxplots(const std::vector<Regime>& regimes,
                                                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const Regime& r : regimes) {
    const auto path = out_dir / (r.file_stem() + ".svg");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << boxplot_svg(r);
    written.push_back(path);
  }
  return written;
}

}  // namespace fmtl
