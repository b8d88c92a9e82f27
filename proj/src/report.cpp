#include "gnids/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gnids/netflow.hpp"

namespace fs = std::filesystem;

namespace gnids {

namespace {

void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

std::string fmt(double v, int prec = 2) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

// Minimal line plot: categorical x positions (one slot per grid value),
// DR on y in [0,1], legend on the right.
std::string render_svg(const std::string& title, const std::vector<const DRCurve*>& curves) {
  const double W = 640, H = 420, L = 60, R = 480, T = 40, B = 370;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::vector<double> params;
  for (const DRCurve* c : curves)
    for (auto [p, dr] : c->points)
      if (std::find(params.begin(), params.end(), p) == params.end()) params.push_back(p);
  std::sort(params.begin(), params.end());
  auto x_of = [&](double p) {
    size_t i = std::find(params.begin(), params.end(), p) - params.begin();
    return params.size() < 2 ? (L + R) / 2
                             : L + (R - L) * static_cast<double>(i) / (params.size() - 1);
  };
  auto y_of = [&](double dr) { return B - (B - T) * dr; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << (L + R) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
       "font-family=\"sans-serif\">" << title << "</text>\n";
  // axes
  s << "<line x1=\"" << L << "\" y1=\"" << B << "\" x2=\"" << R << "\" y2=\"" << B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << B
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double v = i / 5.0;
    s << "<line x1=\"" << L - 4 << "\" y1=\"" << fmt(y_of(v)) << "\" x2=\"" << L << "\" y2=\""
      << fmt(y_of(v)) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << L - 8 << "\" y=\"" << fmt(y_of(v) + 4) << "\" text-anchor=\"end\" "
         "font-size=\"11\" font-family=\"sans-serif\">" << fmt(v, 1) << "</text>\n";
  }
  for (double p : params) {
    s << "<line x1=\"" << fmt(x_of(p)) << "\" y1=\"" << B << "\" x2=\"" << fmt(x_of(p))
      << "\" y2=\"" << B + 4 << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fmt(x_of(p)) << "\" y=\"" << B + 18 << "\" text-anchor=\"middle\" "
         "font-size=\"11\" font-family=\"sans-serif\">" << format_double(p) << "</text>\n";
  }
  s << "<text x=\"" << (L + R) / 2 << "\" y=\"" << B + 36
    << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
       "perturbation parameter</text>\n";
  s << "<text x=\"16\" y=\"" << (T + B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
       "font-family=\"sans-serif\" transform=\"rotate(-90 16 " << (T + B) / 2
    << ")\">detection rate</text>\n";

  for (size_t k = 0; k < curves.size(); ++k) {
    const DRCurve* c = curves[k];
    const char* color = palette[k % 6];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (auto [p, dr] : c->points) s << fmt(x_of(p)) << ',' << fmt(y_of(dr)) << ' ';
    s << "\"/>\n";
    for (auto [p, dr] : c->points)
      s << "<circle cx=\"" << fmt(x_of(p)) << "\" cy=\"" << fmt(y_of(dr))
        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    std::string label = c->model_name + (c->group_tag.empty() ? "" : " " + c->group_tag);
    double ly = T + 14 + 18 * static_cast<double>(k);
    s << "<line x1=\"" << R + 12 << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << R + 34
      << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << R + 38 << "\" y=\"" << fmt(ly) << "\" font-size=\"11\" "
         "font-family=\"sans-serif\">" << label << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string metrics_line(const Metrics& m) {
  std::ostringstream s;
  s << "f1 " << format_double(m.f1) << " recall " << format_double(m.recall) << " precision "
    << format_double(m.precision) << " tp " << m.tp << " fp " << m.fp << " fn " << m.fn << " tn "
    << m.tn << " recall_defined " << (m.recall_defined ? 1 : 0);
  return s.str();
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/curves");
  fs::create_directories(out_dir + "/plots");

  // report.txt: human-readable, deterministic.
  {
    std::ostringstream s;
    s << "gnids experiment report\n";
    s << "dataset " << report.dataset_id << '\n';
    s << "split_seed " << report.split_seed << "\n\n";
    s << "[config]\n" << report.config_text;
    if (!report.config_text.empty() && report.config_text.back() != '\n') s << '\n';
    s << "\n[baseline]\n";
    for (const auto& [model, m] : report.baseline) s << model << ' ' << metrics_line(m) << '\n';
    s << "\n[curves]\n";
    for (const auto& c : report.curves) {
      s << c.attack_name << ' ' << c.model_name << (c.group_tag.empty() ? "" : " " + c.group_tag)
        << " baseline " << format_double(c.baseline_dr) << '\n';
      for (auto [p, dr] : c.points)
        s << "  " << format_double(p) << ' ' << format_double(dr) << '\n';
    }
    if (!report.feature_variants.empty()) {
      s << "\n[feature_variants] count " << report.feature_variants.size() << '\n';
    }
    atomic_write(out_dir + "/report.txt", s.str());
  }

  // Per-curve CSVs.
  for (const auto& c : report.curves) {
    std::ostringstream s;
    s << "parameter,detection_rate\n";
    for (auto [p, dr] : c.points) s << format_double(p) << ',' << format_double(dr) << '\n';
    std::string name = sanitize(c.attack_name) + "_" + sanitize(c.model_name);
    if (!c.group_tag.empty()) name += "_" + sanitize(c.group_tag);
    atomic_write(out_dir + "/curves/" + name + ".csv", s.str());
  }

  // All feature-attack variants in one table.
  if (!report.feature_variants.empty()) {
    std::vector<std::string> models;
    for (const auto& v : report.feature_variants)
      for (const auto& [m, dr] : v.dr_by_model)
        if (std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
    std::ostringstream s;
    s << "group,step";
    for (const auto& m : models) s << ",dr_" << m;
    s << '\n';
    for (const auto& v : report.feature_variants) {
      s << v.group_name << ',' << format_double(v.step);
      for (const auto& m : models) {
        s << ',';
        for (const auto& [name, dr] : v.dr_by_model)
          if (name == m) s << format_double(dr);
      }
      s << '\n';
    }
    atomic_write(out_dir + "/feature_variants.csv", s.str());
  }

  // Plots: one per (attack, model) for structural attacks (add-node keeps
  // its gamma curves together), one combined plot for the feature attack.
  std::map<std::string, std::vector<const DRCurve*>> plot_groups;
  for (const auto& c : report.curves) {
    std::string key = c.attack_name == "feature" ? std::string("feature")
                                                 : c.attack_name + "_" + c.model_name;
    plot_groups[key].push_back(&c);
  }
  for (const auto& [key, curves] : plot_groups)
    atomic_write(out_dir + "/plots/" + sanitize(key) + ".svg", render_svg(key, curves));

  // Runtime accounting: non-deterministic by nature, kept separate.
  {
    std::ostringstream s;
    s << "stage seconds\n";
    for (const auto& [stage, sec] : report.stage_seconds) s << stage << ' ' << fmt(sec, 3) << '\n';
    atomic_write(out_dir + "/timings.txt", s.str());
  }
}

void save_report_data(const std::string& path, const ExperimentReport& report) {
  std::ostringstream s;
  s << "gnids-report v1\n";
  s << "dataset " << report.dataset_id << '\n';
  s << "split_seed " << report.split_seed << '\n';
  s << "config_lines " << std::count(report.config_text.begin(), report.config_text.end(), '\n')
    << '\n';
  s << report.config_text;
  s << "baseline " << report.baseline.size() << '\n';
  for (const auto& [model, m] : report.baseline) s << model << ' ' << metrics_line(m) << '\n';
  s << "curves " << report.curves.size() << '\n';
  for (const auto& c : report.curves) {
    s << c.attack_name << ' ' << c.model_name << ' '
      << (c.group_tag.empty() ? "-" : c.group_tag) << ' ' << format_double(c.baseline_dr) << ' '
      << c.points.size() << '\n';
    for (auto [p, dr] : c.points) s << format_double(p) << ' ' << format_double(dr) << '\n';
  }
  s << "feature_variants " << report.feature_variants.size() << '\n';
  for (const auto& v : report.feature_variants) {
    s << v.group_name << ' ' << format_double(v.step) << ' ' << v.dr_by_model.size();
    for (const auto& [m, dr] : v.dr_by_model) s << ' ' << m << ' ' << format_double(dr);
    s << '\n';
  }
  atomic_write(path, s.str());
}

ExperimentReport load_report_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, version;
  in >> tag >> version;
  if (tag != "gnids-report" || version != "v1")
    throw std::runtime_error(path + ": not a gnids-report v1 file (refusing incompatible input)");
  ExperimentReport r;
  std::string key;
  in >> key >> r.dataset_id;
  in >> key >> r.split_seed;
  size_t config_lines = 0;
  in >> key >> config_lines;
  std::string line;
  std::getline(in, line);
  for (size_t i = 0; i < config_lines; ++i) {
    std::getline(in, line);
    r.config_text += line + '\n';
  }
  size_t n = 0;
  in >> key >> n;
  for (size_t i = 0; i < n; ++i) {
    std::string model, k;
    Metrics m;
    int rd = 1;
    in >> model;
    in >> k >> m.f1 >> k >> m.recall >> k >> m.precision >> k >> m.tp >> k >> m.fp >> k >> m.fn >>
        k >> m.tn >> k >> rd;
    m.recall_defined = rd != 0;
    r.baseline.emplace_back(model, m);
  }
  in >> key >> n;
  for (size_t i = 0; i < n; ++i) {
    DRCurve c;
    std::string gtag;
    size_t pts = 0;
    in >> c.attack_name >> c.model_name >> gtag >> c.baseline_dr >> pts;
    if (gtag != "-") c.group_tag = gtag;
    for (size_t j = 0; j < pts; ++j) {
      double p, dr;
      in >> p >> dr;
      c.points.emplace_back(p, dr);
    }
    r.curves.push_back(std::move(c));
  }
  in >> key >> n;
  for (size_t i = 0; i < n; ++i) {
    FeatureVariantOutcome v;
    size_t m = 0;
    in >> v.group_name >> v.step >> m;
    for (size_t j = 0; j < m; ++j) {
      std::string name;
      double dr;
      in >> name >> dr;
      v.dr_by_model.emplace_back(name, dr);
    }
    r.feature_variants.push_back(std::move(v));
  }
  if (!in) throw std::runtime_error(path + ": parse error");
  return r;
}

}  // namespace gnids
