#include <doctest.h>

#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "ensemblekit/error.hpp"
#include "ensemblekit/report.hpp"

using namespace ensemblekit;
namespace pt = boost::property_tree;

namespace {

std::vector<ComparisonRow> sample_rows() {
  return {{"denn", 0.945949, 0.945611, 0.945949, 0.945055, 0.895604},
          {"bagging", 0.9, 0.8, 0.9, 0.85, 0.7},
          {"a&b", 1.0, 0.0, 1.0, 0.5, 0.0}};
}

pt::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  pt::read_xml(in, tree);
  return tree;
}

// Counts elements named `name` anywhere below `node`.
std::size_t count_named(const pt::ptree& node, const std::string& name) {
  std::size_t n = 0;
  for (const auto& [key, child] : node) {
    if (key == name) ++n;
    n += count_named(child, name);
  }
  return n;
}

void collect_polygons(const pt::ptree& node, std::vector<std::string>& points) {
  for (const auto& [key, child] : node) {
    if (key == "polygon") points.push_back(child.get<std::string>("<xmlattr>.points"));
    collect_polygons(child, points);
  }
}

std::size_t count_legend_entries(const pt::ptree& node) {
  std::size_t n = 0;
  for (const auto& [key, child] : node) {
    if (key == "g" && child.get<std::string>("<xmlattr>.class", "") == "legend-entry") ++n;
    n += count_legend_entries(child);
  }
  return n;
}

}  // namespace

TEST_CASE("comparison csv schema and round trip") {
  const auto rows = sample_rows();
  const std::string csv = comparison_csv(rows);
  CHECK(csv.rfind("method,accuracy,precision,recall,f1,g_mean\n", 0) == 0);
  CHECK(csv.find("denn,0.945949,0.945611,0.945949,0.945055,0.895604\n") != std::string::npos);
  CHECK(parse_comparison_csv(csv) == rows);
  CHECK_THROWS_AS(parse_comparison_csv("nope\n"), FormatError);
  CHECK_THROWS_AS(parse_comparison_csv(std::string(csv) + "x,1,2\n"), FormatError);
}

TEST_CASE("confusion csv schema and round trip") {
  ConfusionMatrix cm;
  cm.counts = {{{90, 10}, {5, 95}}};
  const std::string csv = confusion_csv(cm);
  CHECK(csv == ",pred_0,pred_1\ntrue_0,90,10\ntrue_1,5,95\n");
  CHECK(parse_confusion_csv(csv) == cm);
  CHECK_THROWS_AS(parse_confusion_csv(",pred_0,pred_1\ntrue_0,1,2\n"), FormatError);
}

TEST_CASE("radar json schema") {
  const auto j = nlohmann::json::parse(radar_json(sample_rows()));
  REQUIRE(j.is_array());
  CHECK(j.size() == 3);
  for (const auto& e : j) {
    CHECK(e.size() == 5);
    for (const char* k : {"method", "accuracy", "precision", "f1", "g_mean"}) CHECK(e.contains(k));
  }
  CHECK(j[0]["g_mean"].get<double>() == 0.895604);
}

TEST_CASE("radar svg parses and has one polygon and one legend entry per method") {
  const auto rows = sample_rows();
  const pt::ptree tree = parse_xml(radar_svg(rows));
  std::vector<std::string> polygons;
  collect_polygons(tree, polygons);
  CHECK(polygons.size() == rows.size());
  CHECK(count_legend_entries(tree) == rows.size());
  const std::string svg = radar_svg(rows);
  for (const char* axis : {"Accuracy", "Precision", "F1-Score", "G-Mean"}) {
    CHECK(svg.find(axis) != std::string::npos);
  }
  CHECK(svg.find("Recall omitted") != std::string::npos);
}

TEST_CASE("radar polygon vertices sit at value * radius from the centre") {
  // Centre (260, 250), radius 190; axes at 12, 3, 6 and 9 o'clock.
  const std::vector<ComparisonRow> one = {{"m", 0.5, 1.0, 0.0, 0.25, 0.75}};
  std::vector<std::string> polygons;
  collect_polygons(parse_xml(radar_svg(one)), polygons);
  REQUIRE(polygons.size() == 1);
  std::istringstream in(polygons[0]);
  std::vector<std::pair<double, double>> pts;
  std::string tok;
  while (in >> tok) {
    const auto comma = tok.find(',');
    pts.push_back({std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1))});
  }
  REQUIRE(pts.size() == 4);
  const double expected[4] = {0.5, 1.0, 0.25, 0.75};  // accuracy, precision, f1, g_mean
  for (std::size_t a = 0; a < 4; ++a) {
    const double r = std::hypot(pts[a].first - 260.0, pts[a].second - 250.0);
    CHECK(r == doctest::Approx(expected[a] * 190.0).epsilon(1e-4));
  }
  CHECK(pts[0].second < 250.0);  // accuracy points up
}

TEST_CASE("confusion grid svg parses with one panel per method") {
  ConfusionMatrix cm;
  cm.counts = {{{3, 1}, {0, 4}}};
  const std::vector<NamedConfusion> items = {{"denn", cm}, {"voting", cm}};
  const pt::ptree tree = parse_xml(confusion_grid_svg(items));
  CHECK(count_named(tree, "rect") == 1 + 4 * items.size());
}

TEST_CASE("metrics json keys") {
  MetricsReport r;
  r.accuracy = 0.75;
  r.recall_weighted = 0.75;
  r.confusion.counts = {{{1, 1}, {0, 2}}};
  const auto j = nlohmann::json::parse(metrics_json(r));
  for (const char* k : {"accuracy", "precision", "recall", "f1", "g_mean", "confusion"}) {
    CHECK(j.contains(k));
  }
  CHECK(j["confusion"][0][1].get<int>() == 1);
  CHECK(j["recall"] == j["accuracy"]);
}

TEST_CASE("manifest json carries hashes and outputs") {
  RunManifest m;
  m.command = "train";
  m.method = "denn";
  m.seed = 7;
  m.config_json = R"({"threshold":0.05})";
  m.data_path = "d.dsef";
  m.data_hash = 0xabc;
  m.split_hash = 1;
  m.outputs = {"m.denn"};
  const auto j = nlohmann::json::parse(manifest_json(m));
  CHECK(j["seed"] == 7);
  CHECK(j["config"]["threshold"] == 0.05);
  CHECK(j["data"]["fnv1a64"] == "0000000000000abc");
  CHECK(j["outputs"][0] == "m.denn");
  CHECK(j.contains("duration_seconds"));
}
