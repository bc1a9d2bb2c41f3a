#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "rollforge/evalkit.hpp"

namespace rollforge::eval {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct Series {
  std::vector<int> x;
  std::vector<double> mean, lo, hi;  // mean +/- std band
};

// Minimal SVG line chart with shaded deviation bands; deterministic output.
void write_svg(const std::string& path, const std::string& title,
               const std::map<std::string, Series>& series) {
  const double w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 50;
  const double pw = w - ml - mr, ph = h - mt - mb;
  int xmin = 1, xmax = 1;
  for (const auto& [name, s] : series) {
    for (int x : s.x) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  auto px = [&](double x) { return ml + (x - xmin) / double(xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (1.0 - std::clamp(y, 0.0, 1.0)) * ph; };

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">"
      << title << "</text>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = i / 5.0;
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(y) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(y)
        << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << py(y) << "\" x2=\"" << ml + pw << "\" y2=\""
        << py(y) << "\" stroke=\"#dddddd\"/>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">epoch"
      << "</text>\n";

  int ci = 0;
  double ly = mt + 10;
  for (const auto& [name, s] : series) {
    const char* color = colors[ci % 8];
    if (!s.x.empty()) {
      // deviation band
      std::string band = "M";
      for (size_t i = 0; i < s.x.size(); ++i)
        band += fmt(px(s.x[i])) + "," + fmt(py(s.hi[i])) + " L";
      for (size_t i = s.x.size(); i-- > 0;)
        band += fmt(px(s.x[i])) + "," + fmt(py(s.lo[i])) + (i == 0 ? " Z" : " L");
      out << "<path d=\"" << band << "\" fill=\"" << color
          << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i)
        out << fmt(px(s.x[i])) << "," << fmt(py(s.mean[i])) << " ";
      out << "\"/>\n";
    }
    out << "<rect x=\"" << ml + pw - 150 << "\" y=\"" << ly - 9
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << ml + pw - 132 << "\" y=\"" << ly + 2
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << name << "</text>\n";
    ly += 18;
    ++ci;
  }
  out << "</svg>\n";
}

}  // namespace

std::vector<std::string> emit_report(const EvalReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> files;
  const std::string tag = hash_hex(report.config_hash).substr(0, 8);

  {
    const std::string path = out_dir + "/success_" + tag + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << "level,arm,seed,epoch,success\n";
    for (const auto& r : report.success_rows)
      out << r.level << "," << r.arm << "," << r.seed << "," << r.epoch << ","
          << fmt(r.success) << "\n";
    files.push_back(path);
  }
  {
    const std::string path = out_dir + "/generation_accuracy_" + tag + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << "arm,seed,epoch,state_match,action_match\n";
    for (const auto& r : report.generation_rows)
      out << r.arm << "," << r.seed << "," << r.epoch << "," << fmt(r.state_match) << ","
          << fmt(r.action_match) << "\n";
    files.push_back(path);
  }
  {
    const std::string path = out_dir + "/explanation_" + tag + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << "split,seed,accuracy\n";
    for (const auto& r : report.explanation_rows)
      out << (r.seen ? "seen" : "unseen") << "," << r.seed << "," << fmt(r.accuracy) << "\n";
    files.push_back(path);
  }

  // summary: per level x arm, mean and std over seeds at the final epoch
  std::map<std::pair<std::string, std::string>, std::map<uint64_t, std::pair<int, double>>>
      latest;
  for (const auto& r : report.success_rows) {
    auto& cell = latest[{r.level, r.arm}][r.seed];
    if (r.epoch >= cell.first) cell = {r.epoch, r.success};
  }
  {
    const std::string path = out_dir + "/summary_" + tag + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << "level,arm,mean_success,std_success,seeds\n";
    for (const auto& [key, per_seed] : latest) {
      double mean = 0;
      for (const auto& [seed, v] : per_seed) mean += v.second;
      mean /= per_seed.size();
      double var = 0;
      for (const auto& [seed, v] : per_seed) var += (v.second - mean) * (v.second - mean);
      var /= per_seed.size();
      out << key.first << "," << key.second << "," << fmt(mean) << "," << fmt(std::sqrt(var))
          << "," << per_seed.size() << "\n";
    }
    files.push_back(path);
  }

  // learning-curve plots per level, one series per arm
  std::set<std::string> levels;
  for (const auto& r : report.success_rows) levels.insert(r.level);
  for (const auto& level : levels) {
    std::map<std::string, std::map<int, std::vector<double>>> grouped;
    for (const auto& r : report.success_rows)
      if (r.level == level) grouped[r.arm][r.epoch].push_back(r.success);
    std::map<std::string, Series> series;
    for (const auto& [arm, per_epoch] : grouped) {
      Series s;
      for (const auto& [epoch, vals] : per_epoch) {
        double mean = 0;
        for (double v : vals) mean += v;
        mean /= vals.size();
        double var = 0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= vals.size();
        const double sd = std::sqrt(var);
        s.x.push_back(epoch);
        s.mean.push_back(mean);
        s.lo.push_back(mean - sd);
        s.hi.push_back(mean + sd);
      }
      series[arm] = std::move(s);
    }
    const std::string path = out_dir + "/success_" + level + "_" + tag + ".svg";
    write_svg(path, "success rate: " + level, series);
    files.push_back(path);
  }
  if (!report.generation_rows.empty()) {
    std::map<std::string, std::map<int, std::vector<double>>> gstate, gact;
    for (const auto& r : report.generation_rows) {
      gstate[r.arm][r.epoch].push_back(r.state_match);
      gact[r.arm][r.epoch].push_back(r.action_match);
    }
    std::map<std::string, Series> series;
    auto build = [](const std::map<int, std::vector<double>>& per_epoch) {
      Series s;
      for (const auto& [epoch, vals] : per_epoch) {
        double mean = 0;
        for (double v : vals) mean += v;
        mean /= vals.size();
        double var = 0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= vals.size();
        s.x.push_back(epoch);
        s.mean.push_back(mean);
        s.lo.push_back(mean - std::sqrt(var));
        s.hi.push_back(mean + std::sqrt(var));
      }
      return s;
    };
    for (const auto& [arm, per_epoch] : gstate) series[arm + " state"] = build(per_epoch);
    for (const auto& [arm, per_epoch] : gact) series[arm + " action"] = build(per_epoch);
    const std::string path = out_dir + "/generation_accuracy_" + tag + ".svg";
    write_svg(path, "generation accuracy", series);
    files.push_back(path);
  }
  return files;
}

}  // namespace rollforge::eval
