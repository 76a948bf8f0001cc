#include "ensemblekit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "ensemblekit/binary_io.hpp"
#include "ensemblekit/error.hpp"

namespace ensemblekit {

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kComparisonHeader = "method,accuracy,precision,recall,f1,g_mean";
constexpr std::string_view kConfusionHeader = ",pred_0,pred_1";

constexpr const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string_view> split_view(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// Non-empty lines with any trailing '\r' removed.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::string_view line : split_view(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("bad " + std::string(what) + " value '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_count(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("bad confusion count '" + std::string(s) + "'");
  }
  return v;
}

std::string xml_escape(std::string_view s) {
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

ordered_json confusion_to_json(const ConfusionMatrix& cm) {
  return ordered_json::array({ordered_json::array({cm.counts[0][0], cm.counts[0][1]}),
                              ordered_json::array({cm.counts[1][0], cm.counts[1][1]})});
}

}  // namespace

ComparisonRow comparison_row(std::string method, const MetricsReport& report) {
  return {std::move(method), report.accuracy,    report.precision_weighted,
          report.recall_weighted, report.f1_weighted, report.g_mean};
}

std::string comparison_csv(std::span<const ComparisonRow> rows) {
  std::string out(kComparisonHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.method;
    for (double v : {r.accuracy, r.precision, r.recall, r.f1, r.g_mean}) {
      out += ',';
      out += fixed(v, 6);
    }
    out += '\n';
  }
  return out;
}

std::vector<ComparisonRow> parse_comparison_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kComparisonHeader) {
    throw FormatError("comparison table: missing header '" + std::string(kComparisonHeader) + "'");
  }
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_view(lines[i], ',');
    if (cells.size() != 6 || cells[0].empty()) {
      throw FormatError("comparison table: malformed row " + std::to_string(i));
    }
    rows.push_back({std::string(cells[0]), parse_double(cells[1], "accuracy"),
                    parse_double(cells[2], "precision"), parse_double(cells[3], "recall"),
                    parse_double(cells[4], "f1"), parse_double(cells[5], "g_mean")});
  }
  return rows;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out(kConfusionHeader);
  out += '\n';
  for (int t = 0; t < 2; ++t) {
    out += "true_" + std::to_string(t);
    for (int p = 0; p < 2; ++p) out += "," + std::to_string(cm.counts[t][p]);
    out += '\n';
  }
  return out;
}

ConfusionMatrix parse_confusion_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() != 3 || lines[0] != kConfusionHeader) {
    throw FormatError("confusion table: expected a header and two rows");
  }
  ConfusionMatrix cm;
  for (int t = 0; t < 2; ++t) {
    const auto cells = split_view(lines[t + 1], ',');
    if (cells.size() != 3 || cells[0] != "true_" + std::to_string(t)) {
      throw FormatError("confusion table: malformed row true_" + std::to_string(t));
    }
    cm.counts[t][0] = parse_count(cells[1]);
    cm.counts[t][1] = parse_count(cells[2]);
  }
  return cm;
}

std::string radar_json(std::span<const ComparisonRow> rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"method", r.method},
                   {"accuracy", r.accuracy},
                   {"precision", r.precision},
                   {"f1", r.f1},
                   {"g_mean", r.g_mean}});
  }
  return arr.dump(2) + "\n";
}

std::string radar_svg(std::span<const ComparisonRow> rows) {
  constexpr double kCx = 260.0;
  constexpr double kCy = 250.0;
  constexpr double kRadius = 190.0;
  constexpr int kAxes = 4;
  const char* axis_names[kAxes] = {"Accuracy", "Precision", "F1-Score", "G-Mean"};

  // Axis i points at -90 + 90 i degrees; value v in [0,1] sits at v * radius.
  auto point = [&](int axis, double v) {
    const double angle = -std::numbers::pi / 2 + axis * std::numbers::pi / 2;
    const double r = std::clamp(v, 0.0, 1.0) * kRadius;
    return fixed(kCx + r * std::cos(angle), 3) + "," + fixed(kCy + r * std::sin(angle), 3);
  };

  const double legend_top = 40.0;
  const double height = std::max(520.0, legend_top + 22.0 * (rows.size() + 2) + 20.0);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"" << fixed(height, 0)
      << "\" viewBox=\"0 0 760 " << fixed(height, 0) << "\" font-family=\"sans-serif\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "  <g class=\"grid\" fill=\"none\" stroke=\"#cccccc\">\n";
  for (int ring = 1; ring <= 5; ++ring) {
    const double v = ring / 5.0;
    svg << "    <polyline points=\"";
    for (int a = 0; a <= kAxes; ++a) svg << (a ? " " : "") << point(a % kAxes, v);
    svg << "\"/>\n";
    svg << "    <text x=\"" << fixed(kCx + 4, 3) << "\" y=\"" << fixed(kCy - v * kRadius - 3, 3)
        << "\" font-size=\"10\" fill=\"#888888\" stroke=\"none\">" << fixed(v, 1) << "</text>\n";
  }
  for (int a = 0; a < kAxes; ++a) {
    svg << "    <polyline points=\"" << point(a, 0.0) << " " << point(a, 1.0) << "\"/>\n";
  }
  svg << "  </g>\n  <g class=\"axes\" font-size=\"13\" text-anchor=\"middle\">\n";
  for (int a = 0; a < kAxes; ++a) {
    const double angle = -std::numbers::pi / 2 + a * std::numbers::pi / 2;
    const double r = kRadius + 22.0;
    svg << "    <text x=\"" << fixed(kCx + r * std::cos(angle), 3) << "\" y=\""
        << fixed(kCy + r * std::sin(angle) + 4.0, 3) << "\">" << axis_names[a] << "</text>\n";
  }
  svg << "  </g>\n  <g class=\"series\" fill-opacity=\"0.08\" stroke-width=\"2\">\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const char* color = kPalette[i % std::size(kPalette)];
    const double values[kAxes] = {r.accuracy, r.precision, r.f1, r.g_mean};
    svg << "    <polygon data-method=\"" << xml_escape(r.method) << "\" fill=\"" << color
        << "\" stroke=\"" << color << "\" points=\"";
    for (int a = 0; a < kAxes; ++a) svg << (a ? " " : "") << point(a, values[a]);
    svg << "\"/>\n";
  }
  svg << "  </g>\n  <g class=\"legend\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = legend_top + 22.0 * i;
    svg << "    <g class=\"legend-entry\"><rect x=\"540\" y=\"" << fixed(y, 0)
        << "\" width=\"14\" height=\"14\" fill=\"" << kPalette[i % std::size(kPalette)]
        << "\"/><text x=\"562\" y=\"" << fixed(y + 12, 0) << "\">" << xml_escape(rows[i].method)
        << "</text></g>\n";
  }
  const double note_y = legend_top + 22.0 * rows.size() + 16.0;
  svg << "    <text class=\"note\" x=\"540\" y=\"" << fixed(note_y, 0)
      << "\" font-size=\"10\" fill=\"#555555\">Recall omitted: it equals accuracy</text>\n"
      << "    <text class=\"note\" x=\"540\" y=\"" << fixed(note_y + 13, 0)
      << "\" font-size=\"10\" fill=\"#555555\">under support-weighted averaging.</text>\n"
      << "  </g>\n</svg>\n";
  return svg.str();
}

std::string confusion_grid_svg(std::span<const NamedConfusion> items) {
  constexpr int kColumns = 4;
  constexpr double kCell = 60.0;
  constexpr double kPanelW = 190.0;
  constexpr double kPanelH = 190.0;
  const std::size_t n_rows = (items.size() + kColumns - 1) / kColumns;
  const double width = kColumns * kPanelW + 20.0;
  const double height = std::max<std::size_t>(n_rows, 1) * kPanelH + 20.0;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
      << fixed(height, 0) << "\" viewBox=\"0 0 " << fixed(width, 0) << " " << fixed(height, 0)
      << "\" font-family=\"sans-serif\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double ox = 20.0 + (i % kColumns) * kPanelW + 30.0;
    const double oy = 10.0 + (i / kColumns) * kPanelH + 30.0;
    const auto& cm = items[i].confusion;
    std::uint64_t largest = 1;
    for (const auto& row : cm.counts)
      for (auto c : row) largest = std::max(largest, c);

    svg << "  <g class=\"confusion\" data-method=\"" << xml_escape(items[i].method) << "\">\n"
        << "    <text x=\"" << fixed(ox + kCell, 1) << "\" y=\"" << fixed(oy - 14, 1)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << xml_escape(items[i].method)
        << "</text>\n";
    for (int t = 0; t < 2; ++t) {
      for (int p = 0; p < 2; ++p) {
        const double shade = static_cast<double>(cm.counts[t][p]) / static_cast<double>(largest);
        const int level = static_cast<int>(std::lround(255.0 - 180.0 * shade));
        char color[8];
        std::snprintf(color, sizeof color, "#%02x%02xff", level, level);
        const double x = ox + p * kCell;
        const double y = oy + t * kCell;
        svg << "    <rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y, 1) << "\" width=\""
            << fixed(kCell, 0) << "\" height=\"" << fixed(kCell, 0) << "\" fill=\"" << color
            << "\" stroke=\"#444444\"/>\n"
            << "    <text x=\"" << fixed(x + kCell / 2, 1) << "\" y=\"" << fixed(y + kCell / 2 + 5, 1)
            << "\" font-size=\"13\" text-anchor=\"middle\">" << cm.counts[t][p] << "</text>\n";
      }
    }
    svg << "    <text x=\"" << fixed(ox + kCell, 1) << "\" y=\"" << fixed(oy + 2 * kCell + 16, 1)
        << "\" font-size=\"10\" text-anchor=\"middle\">predicted 0 / 1</text>\n"
        << "    <text x=\"" << fixed(ox - 8, 1) << "\" y=\"" << fixed(oy + kCell, 1)
        << "\" font-size=\"10\" text-anchor=\"end\">true</text>\n"
        << "  </g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string metrics_json(const MetricsReport& report) {
  ordered_json j = {{"accuracy", report.accuracy},
                    {"precision", report.precision_weighted},
                    {"recall", report.recall_weighted},
                    {"f1", report.f1_weighted},
                    {"g_mean", report.g_mean},
                    {"confusion", confusion_to_json(report.confusion)}};
  return j.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  ordered_json j = {{"command", m.command},
                    {"method", m.method},
                    {"seed", m.seed},
                    {"config", ordered_json::parse(m.config_json)},
                    {"data", {{"path", m.data_path}, {"fnv1a64", hex64(m.data_hash)}}},
                    {"split_hash", hex64(m.split_hash)},
                    {"smote_hash", hex64(m.smote_hash)},
                    {"outputs", m.outputs},
                    {"duration_seconds", m.duration_seconds}};
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_json(manifest));
}

}  // namespace ensemblekit
