#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otmatch/evaluation.hpp"
#include "otmatch/geometry.hpp"
#include "otmatch/hierarchy.hpp"
#include "otmatch/simulation.hpp"
#include "otmatch/transport.hpp"

// File formats.  Every file starts with a versioned schema line
// ("# otmatch.<kind>.v1" for CSV, a "schema" field for JSON).  Reals are
// serialized with 17 significant digits, so write-then-read is exact.
// Writes go through a temp-file-then-rename so readers never observe a
// partial file.

namespace otm::io {

LabeledCloud load_points(const std::string& path);
void save_points(const std::string& path, const LabeledCloud& cloud);

StereoRig load_calibration(const std::string& path);
void save_calibration(const std::string& path, const StereoRig& rig);

/// FNV-1a over the canonical serialized rig; stamped into cost files so a
/// matrix can be traced back to the calibration it was computed with.
std::string calibration_hash(const StereoRig& rig);

struct CostFileData {
  CostMatrix matrix = CostMatrix::zeros(1, 1);
  std::vector<std::string> left_ids;
  std::vector<std::string> right_ids;
  std::string calibration_hash;
};

void save_cost_matrix(const std::string& path, const CostMatrix& matrix,
                      const std::vector<std::string>& left_ids,
                      const std::vector<std::string>& right_ids,
                      const std::string& calibration_hash);
CostFileData load_cost_matrix(const std::string& path);

struct PlanFileEntry {
  std::string left_id;
  std::string right_id;
  double mass = 0.0;
};

void save_plan(const std::string& path, const std::vector<PlanFileEntry>& entries);
std::vector<PlanFileEntry> load_plan(const std::string& path);

struct MatchingFileData {
  std::vector<IdPair> pairs;
  MatchSource source = MatchSource::OT;
};

void save_matching(const std::string& path, const std::vector<IdPair>& pairs, MatchSource source);
MatchingFileData load_matching(const std::string& path);

struct CloudRow {
  std::string left_id;
  std::string right_id;
  WorldPoint point = WorldPoint::Zero();
  bool in_front = true;
};

struct SkippedRow {
  std::string left_id;
  std::string right_id;
  std::string reason;
};

struct CloudFileData {
  std::vector<CloudRow> rows;
  std::vector<SkippedRow> skipped;
};

void save_cloud(const std::string& path, const CloudFileData& data);
CloudFileData load_cloud(const std::string& path);

struct MetricsFileData {
  MetricsReport report;
  std::string config_echo;  // flag/file summary, includes tool version
  std::optional<std::uint64_t> seed;
};

void save_metrics(const std::string& path, const MetricsFileData& data);
MetricsFileData load_metrics(const std::string& path);

SweepConfig load_sweep_config(const std::string& path);
void save_sweep_config(const std::string& path, const SweepConfig& cfg);

void save_sweep_csv(const std::string& path, const SweepResult& result);
SweepResult load_sweep_csv(const std::string& path);

/// Static plot of mean mismatch versus noise level, one polyline per
/// (distance, matcher) row group.
void save_sweep_svg(const std::string& path, const SweepResult& result);

/// Schema line of a CSV artifact ("otmatch.plan.v1" etc.); used by commands
/// that accept either a plan or a matching file.
std::string peek_schema(const std::string& path);

std::string format_real(double value);
void atomic_write(const std::string& path, const std::string& content);

const char* match_source_name(MatchSource source);
std::optional<MatchSource> match_source_from_name(const std::string& name);

}  // namespace otm::io

namespace otm::cli {

/// Entry point used by both the otmatch binary and the test suite.
/// Returns the process exit code: 0 success, 2 parse/validation errors,
/// 3 infeasible or degenerate inputs, 4 I/O failures.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace otm::cli
