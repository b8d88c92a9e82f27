#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gnids/metrics.hpp"
#include "gnids/report.hpp"
#include "gnids/rng.hpp"
#include "gnids/sweep.hpp"

using namespace gnids;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentReport sample_report() {
  ExperimentReport r;
  r.dataset_id = "synth:scan";
  r.split_seed = 7;
  r.config_text = "[dataset]\nkind = synth\n";
  Metrics m;
  m.f1 = 0.95;
  m.recall = 0.9;
  m.precision = 1.0;
  m.tp = 18;
  m.fn = 2;
  m.tn = 180;
  r.baseline.emplace_back("egraphsage", m);
  DRCurve c1{"c2x_benign", "egraphsage", "", 0.9, {{0, 0.9}, {1, 0.5}, {2, 0.4}}};
  DRCurve c2{"c2x_benign", "linegraphsage", "", 0.92, {{0, 0.92}, {1, 0.8}, {2, 0.75}}};
  r.curves = {c1, c2};
  FeatureVariantOutcome v{"duration", 1.0, {{"egraphsage", 0.88}, {"rf", 0.4}}};
  r.feature_variants = {v};
  return r;
}

}  // namespace

TEST_CASE("perfect predictions score 1.0 everywhere") {
  std::vector<Label> y = {Label::malicious, Label::benign, Label::malicious};
  Metrics m = compute_metrics(y, y);
  CHECK(m.f1 == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.tp == 2);
  CHECK(m.tn == 1);
}

TEST_CASE("hand-computed confusion matrix: tp=8 fn=2 fp=1") {
  std::vector<Label> labels, preds;
  for (int i = 0; i < 8; ++i) {  // tp
    labels.push_back(Label::malicious);
    preds.push_back(Label::malicious);
  }
  for (int i = 0; i < 2; ++i) {  // fn
    labels.push_back(Label::malicious);
    preds.push_back(Label::benign);
  }
  labels.push_back(Label::benign);  // fp
  preds.push_back(Label::malicious);
  for (int i = 0; i < 5; ++i) {  // tn
    labels.push_back(Label::benign);
    preds.push_back(Label::benign);
  }
  Metrics m = compute_metrics(preds, labels);
  CHECK(m.recall == doctest::Approx(0.8));
  CHECK(m.precision == doctest::Approx(8.0 / 9.0));
  double expected_f1 = 2.0 * (8.0 / 9.0) * 0.8 / ((8.0 / 9.0) + 0.8);
  CHECK(m.f1 == doctest::Approx(expected_f1));
}

TEST_CASE("degenerate predictors and label sets") {
  std::vector<Label> labels = {Label::malicious, Label::benign, Label::malicious};
  std::vector<Label> all_benign(3, Label::benign);
  Metrics m = compute_metrics(all_benign, labels);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK(m.recall_defined);

  std::vector<Label> no_pos(3, Label::benign);
  Metrics z = compute_metrics(all_benign, no_pos);
  CHECK(z.recall == 0.0);
  CHECK_FALSE(z.recall_defined);
}

TEST_CASE("metrics match a brute-force recount on random vectors") {
  Rng rng(7);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + trial;
    std::vector<Label> labels(n), preds(n);
    for (int i = 0; i < n; ++i) {
      labels[i] = coin(rng) ? Label::malicious : Label::benign;
      preds[i] = coin(rng) ? Label::malicious : Label::benign;
    }
    Metrics m = compute_metrics(preds, labels);
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (int i = 0; i < n; ++i) {
      if (preds[i] == Label::malicious)
        (labels[i] == Label::malicious ? tp : fp)++;
      else
        (labels[i] == Label::malicious ? fn : tn)++;
    }
    CHECK(m.tp == tp);
    CHECK(m.fp == fp);
    CHECK(m.fn == fn);
    CHECK(m.tn == tn);
    CHECK(m.tp + m.fp + m.fn + m.tn == n);
  }
}

TEST_CASE("detection rate ignores predictions beyond the original records") {
  std::vector<Label> originals = {Label::malicious, Label::benign, Label::malicious};
  std::vector<Label> preds = {Label::malicious, Label::benign, Label::benign,
                              Label::malicious, Label::malicious};  // 2 added records
  double dr = detection_rate_on_originals(preds, originals);
  CHECK(dr == doctest::Approx(0.5));
  // relabeling the added tail never changes DR
  preds[3] = Label::benign;
  preds[4] = Label::benign;
  CHECK(detection_rate_on_originals(preds, originals) == doctest::Approx(dr));
}

TEST_CASE("emit_report fans out one csv and plot set per curve") {
  fs::path dir = fs::temp_directory_path() / "gnids_report_test";
  fs::remove_all(dir);
  ExperimentReport r = sample_report();
  emit_report(r, dir.string());

  CHECK(fs::exists(dir / "report.txt"));
  CHECK(fs::exists(dir / "curves/c2x_benign_egraphsage.csv"));
  CHECK(fs::exists(dir / "curves/c2x_benign_linegraphsage.csv"));
  CHECK(fs::exists(dir / "plots/c2x_benign_egraphsage.svg"));
  CHECK(fs::exists(dir / "plots/c2x_benign_linegraphsage.svg"));
  CHECK(fs::exists(dir / "feature_variants.csv"));
  CHECK(fs::exists(dir / "timings.txt"));

  SUBCASE("rerun on the same report is byte-identical") {
    std::string report_before = slurp(dir / "report.txt");
    std::string csv_before = slurp(dir / "curves/c2x_benign_egraphsage.csv");
    std::string svg_before = slurp(dir / "plots/c2x_benign_egraphsage.svg");
    emit_report(r, dir.string());
    CHECK(slurp(dir / "report.txt") == report_before);
    CHECK(slurp(dir / "curves/c2x_benign_egraphsage.csv") == csv_before);
    CHECK(slurp(dir / "plots/c2x_benign_egraphsage.svg") == svg_before);
  }

  SUBCASE("curve csv reparses to the same values") {
    std::ifstream in(dir / "curves/c2x_benign_egraphsage.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "parameter,detection_rate");
    std::vector<std::pair<double, double>> points;
    std::string line;
    while (std::getline(in, line)) {
      auto comma = line.find(',');
      points.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    CHECK(points == r.curves[0].points);
  }
}

TEST_CASE("report data file round-trips the full structure") {
  ExperimentReport r = sample_report();
  fs::path p = fs::temp_directory_path() / "gnids_report_data.txt";
  save_report_data(p.string(), r);
  ExperimentReport back = load_report_data(p.string());
  CHECK(back.dataset_id == r.dataset_id);
  CHECK(back.split_seed == r.split_seed);
  CHECK(back.config_text == r.config_text);
  REQUIRE(back.baseline.size() == 1);
  CHECK(back.baseline[0].first == "egraphsage");
  CHECK(back.baseline[0].second.f1 == r.baseline[0].second.f1);
  CHECK(back.baseline[0].second.tp == r.baseline[0].second.tp);
  REQUIRE(back.curves.size() == 2);
  CHECK(back.curves[0].points == r.curves[0].points);
  CHECK(back.curves[0].baseline_dr == r.curves[0].baseline_dr);
  CHECK(back.curves[1].model_name == "linegraphsage");
  REQUIRE(back.feature_variants.size() == 1);
  CHECK(back.feature_variants[0].group_name == "duration");
  CHECK(back.feature_variants[0].dr_by_model == r.feature_variants[0].dr_by_model);

  // incompatible artifact versions are refused
  {
    std::ofstream out(p);
    out << "gnids-report v99\n";
  }
  CHECK_THROWS_WITH_AS(load_report_data(p.string()), doctest::Contains("v1"), std::runtime_error);
}
