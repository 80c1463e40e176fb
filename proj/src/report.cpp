#include "xthb/report.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace xthb {

namespace {

std::string row_line(const StepRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.6e,%.6e,%.6e,%.4f,%.4f,%.3f", r.step,
                r.field.c_str(), r.n_dof, r.h, r.err_l2, r.err_h1, r.rate_l2, r.rate_h1,
                r.seconds);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string sanitize(const std::string& name) {
  std::string s = name;
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  return s;
}

constexpr const char* kPlotScript = R"(#!/usr/bin/env python3
"""Log-log convergence plots of report.csv next to this script."""
import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "report.csv"), newline="") as f:
    rows = list(csv.DictReader(f))

series = defaultdict(list)
for r in rows:
    series[r["field"]].append(r)

fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
for name, pts in sorted(series.items()):
    x = [float(r["h"]) for r in pts]
    for ax, key in ((axes[0], "err_L2"), (axes[1], "err_H1")):
        y = [float(r[key]) for r in pts]
        if any(v > 0 for v in y):
            ax.loglog(x, y, marker="o", label=name)

for ax, title in ((axes[0], "L2 error"), (axes[1], "H1 seminorm error")):
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()

fig.tight_layout()
out = os.path.join(here, "convergence.png")
fig.savefig(out, dpi=150)
print("wrote", out)
)";

}  // namespace

std::string format_csv(const StudyReport& rep) {
  std::string csv = "step,field,n_dof,h,err_L2,err_H1,rate_L2,rate_H1,seconds\n";
  for (const StepRecord& r : rep.rows) csv += row_line(r) + "\n";
  return csv;
}

std::string format_field_export(const FieldExport& ex) {
  std::string text = "field " + ex.field + "\n";
  text += "triangles " + std::to_string(ex.vertices.size() / 3) + "\n";
  char buf[128];
  for (const FieldExport::Vertex& v : ex.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9e %.9e %.9e\n", v.p.x, v.p.y, v.v);
    text += buf;
  }
  return text;
}

std::vector<std::string> emit_report(const StudyReport& rep, const StudyConfig& cfg,
                                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");

  std::vector<std::string> written;
  const auto emit = [&](const fs::path& name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back((dir / name).string());
  };

  emit("report.csv", format_csv(rep));

  nlohmann::json summary;
  summary["study"] = rep.study;
  summary["title"] = cfg.title;
  summary["config"] = nlohmann::json::parse(serialize_config(cfg));
  summary["rows"] = nlohmann::json::array();
  for (const StepRecord& r : rep.rows)
    summary["rows"].push_back({{"step", r.step},
                               {"field", r.field},
                               {"n_dof", r.n_dof},
                               {"h", r.h},
                               {"err_L2", r.err_l2},
                               {"err_H1", r.err_h1},
                               {"rate_L2", r.rate_l2},
                               {"rate_H1", r.rate_h1},
                               {"seconds", r.seconds}});
  summary["summary"] = rep.summary;
  emit("summary.json", summary.dump(2) + "\n");

  if (cfg.output.plot) emit("plot_report.py", kPlotScript);
  for (const FieldExport& ex : rep.exports)
    emit("field_" + sanitize(ex.field) + ".txt", format_field_export(ex));
  return written;
}

}  // namespace xthb
