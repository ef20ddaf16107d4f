#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "prompt/harness.hpp"
#include "prompt/math.hpp"

namespace prompt::harness {
namespace {

constexpr double kWidthPerGroup = 90.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 90.0;
constexpr double kBoxHalfWidth = 25.0;

std::string fixed(double v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << v;
  return out.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

}  // namespace

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw ValidationError("box_stats needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("box_stats values must be finite");
  }
  std::sort(values.begin(), values.end());
  BoxStats s;
  s.count = values.size();
  s.q1 = quantile_type7(values, 0.25);
  s.median = quantile_type7(values, 0.5);
  s.q3 = quantile_type7(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
    } else {
      s.whisker_low = std::min(s.whisker_low, v);
      s.whisker_high = std::max(s.whisker_high, v);
    }
  }
  return s;
}

std::string boxplot_svg(const std::vector<Group>& groups, const std::string& title, const std::string& y_label) {
  if (groups.empty()) throw ValidationError("boxplot needs at least one group");
  std::vector<BoxStats> stats;
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& [label, values] : groups) {
    stats.push_back(box_stats(values));
    lo = std::min(lo, values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()));
    hi = std::max(hi, values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()));
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double width = kMarginLeft + kMarginRight + kWidthPerGroup * static_cast<double>(groups.size());
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto y = [&](double v) { return kMarginTop + (hi - v) / (hi - lo) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\"" << fixed(kHeight)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
  svg << "<text x=\"15\" y=\"" << fixed(kMarginTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << fixed(kMarginTop + plot_h / 2) << ")\">" << escape(y_label) << "</text>\n";
  svg << "<line x1=\"" << fixed(kMarginLeft) << "\" y1=\"" << fixed(kMarginTop) << "\" x2=\"" << fixed(kMarginLeft)
      << "\" y2=\"" << fixed(kMarginTop + plot_h) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    svg << "<text x=\"" << fixed(kMarginLeft - 5) << "\" y=\"" << fixed(y(v) + 4) << "\" text-anchor=\"end\">"
        << fixed(v) << "</text>\n";
  }
  svg << "<line class=\"zero\" x1=\"" << fixed(kMarginLeft) << "\" y1=\"" << fixed(y(0.0)) << "\" x2=\""
      << fixed(width - kMarginRight) << "\" y2=\"" << fixed(y(0.0)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& s = stats[g];
    const double cx = kMarginLeft + kWidthPerGroup * (static_cast<double>(g) + 0.5);
    svg << "<g class=\"box\">\n";
    svg << "<line x1=\"" << fixed(cx) << "\" y1=\"" << fixed(y(s.whisker_high)) << "\" x2=\"" << fixed(cx)
        << "\" y2=\"" << fixed(y(s.q3)) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << fixed(cx) << "\" y1=\"" << fixed(y(s.q1)) << "\" x2=\"" << fixed(cx) << "\" y2=\""
        << fixed(y(s.whisker_low)) << "\" stroke=\"black\"/>\n";
    svg << "<rect x=\"" << fixed(cx - kBoxHalfWidth) << "\" y=\"" << fixed(y(s.q3)) << "\" width=\""
        << fixed(2 * kBoxHalfWidth) << "\" height=\"" << fixed(y(s.q1) - y(s.q3))
        << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << fixed(cx - kBoxHalfWidth) << "\" y1=\"" << fixed(y(s.median)) << "\" x2=\""
        << fixed(cx + kBoxHalfWidth) << "\" y2=\"" << fixed(y(s.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double o : s.outliers) {
      svg << "<circle cx=\"" << fixed(cx) << "\" cy=\"" << fixed(y(o)) << "\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n";
    }
    const double ly = kMarginTop + plot_h + 15;
    svg << "<text x=\"" << fixed(cx) << "\" y=\"" << fixed(ly) << "\" text-anchor=\"end\" transform=\"rotate(-35 "
        << fixed(cx) << ' ' << fixed(ly) << ")\">" << escape(groups[g].first) << "</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_boxplot_svg(const std::vector<Group>& groups, const std::filesystem::path& path, const std::string& title,
                      const std::string& y_label) {
  const auto text = boxplot_svg(groups, title, y_label);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Group> group_by_cell(const std::vector<SimulationResult>& results) {
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : results) {
    if (!r.ok() || !std::isfinite(r.advantage)) continue;
    auto [it, inserted] = index.emplace(r.cell, groups.size());
    if (inserted) groups.push_back({r.cell, {}});
    groups[it->second].second.push_back(r.advantage);
  }
  return groups;
}

}  // namespace prompt::harness
