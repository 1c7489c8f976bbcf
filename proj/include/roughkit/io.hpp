#pragma once

#include <optional>
#include <string>

#include "roughkit/experiments.hpp"
#include "roughkit/metrics.hpp"
#include "roughkit/path.hpp"

namespace roughkit {

// CSV with 17 significant digits: numeric round-trips are bit-exact.
// Comment lines start with '#'; sampled paths carry "# seed=...,stream=...".

void write_path_csv(const PiecewiseLinearPath& path, const std::string& file,
                    const std::optional<RngSpec>& rng = std::nullopt);
PiecewiseLinearPath read_path_csv(const std::string& file);

// header t,g1_1..g1_d,g2_11..g2_dd[,g3_111..g3_ddd]
void write_lifted_csv(const LiftedPath& lp, const std::string& file);
LiftedPath read_lifted_csv(const std::string& file);

void write_metric_report_csv(const MetricReport& rep, const std::string& file);

// columns: replica,level,mesh,defect,a1,a2,a4,wall_ms (valid replicas only)
void write_study_csv(const RateStudyResult& res, const std::string& file);

// slope, CI, config echo, per-level aggregates; timestamps confined to `meta`
void write_study_summary_json(const RateStudyResult& res, const std::string& file);

std::string format_g17(double v);

}  // namespace roughkit
