#pragma once

#include <string>
#include <vector>

#include "xthb/study.hpp"

namespace xthb {

/// Report rows as CSV with the fixed header
///   step,field,n_dof,h,err_L2,err_H1,rate_L2,rate_H1,seconds
/// in fixed numeric formats, so identical reports serialize byte-identically.
/// An empty report yields the header line only.
std::string format_csv(const StudyReport& rep);

/// One field export as line-oriented text: a `field <name>` line, a
/// `triangles <count>` line, then three `v <x> <y> <value>` lines per
/// triangle.
std::string format_field_export(const FieldExport& ex);

/// Write report.csv, summary.json, the plot script (when output.plot) and
/// one field_<name>.txt per export into `out_dir`, creating the directory
/// when needed. Returns the written paths. Throws std::runtime_error when a
/// file cannot be written.
std::vector<std::string> emit_report(const StudyReport& rep, const StudyConfig& cfg,
                                     const std::string& out_dir);

}  // namespace xthb
