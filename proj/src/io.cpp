#include "otmatch/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "otmatch/version.hpp"

namespace otm::io {

using nlohmann::json;

namespace {

constexpr const char* kPointsSchema = "otmatch.points.v1";
constexpr const char* kCostSchema = "otmatch.cost.v1";
constexpr const char* kPlanSchema = "otmatch.plan.v1";
constexpr const char* kMatchingSchema = "otmatch.matching.v1";
constexpr const char* kCloudSchema = "otmatch.cloud.v1";
constexpr const char* kMetricsSchema = "otmatch.metrics.v1";
constexpr const char* kConfigSchema = "otmatch.config.v1";
constexpr const char* kSweepSchema = "otmatch.sweep.v1";
constexpr const char* kCalibrationSchema = "otmatch.calibration.v1";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) raise(Errc::IoError, "failed reading '" + path + "'");
  return buffer.str();
}

void validate_id(const std::string& id) {
  if (id.empty()) raise(Errc::ValidationError, "identifiers must be nonempty");
  for (char c : id)
    if (c == ',' || c == '\n' || c == '\r' || c == '#')
      raise(Errc::ValidationError, "identifier '" + id + "' contains a reserved character");
}

/// Line-oriented CSV reader with `#`-comment support and positional errors.
class CsvReader {
 public:
  CsvReader(const std::string& path, std::string content) : path_(path) {
    std::size_t start = 0;
    while (start <= content.size()) {
      std::size_t end = content.find('\n', start);
      if (end == std::string::npos) end = content.size();
      std::string line = content.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(std::move(line));
      if (end == content.size()) break;
      start = end + 1;
    }
    while (!lines_.empty() && lines_.back().empty()) lines_.pop_back();
  }

  [[noreturn]] void fail(std::size_t line, std::size_t col, const std::string& msg) const {
    raise(Errc::ParseError,
          path_ + ":" + std::to_string(line + 1) + ":" + std::to_string(col + 1) + ": " + msg);
  }

  std::string expect_schema(const std::string& schema) {
    if (lines_.empty() || lines_[0].rfind("# ", 0) != 0) fail(0, 0, "missing schema line");
    const std::string found = lines_[0].substr(2);
    if (found != schema) fail(0, 3, "expected schema '" + schema + "', found '" + found + "'");
    cursor_ = 1;
    return found;
  }

  /// Consumes leading `# key value...` comment lines after the schema.
  std::map<std::string, std::string> metadata() {
    std::map<std::string, std::string> meta;
    while (cursor_ < lines_.size() && lines_[cursor_].rfind("# ", 0) == 0) {
      const std::string body = lines_[cursor_].substr(2);
      const std::size_t space = body.find(' ');
      if (space == std::string::npos) meta[body] = "";
      else meta[body.substr(0, space)] = body.substr(space + 1);
      ++cursor_;
    }
    return meta;
  }

  void expect_header(const std::string& header) {
    if (cursor_ >= lines_.size()) fail(cursor_, 0, "missing header row '" + header + "'");
    if (lines_[cursor_] != header)
      fail(cursor_, 0, "expected header '" + header + "', found '" + lines_[cursor_] + "'");
    ++cursor_;
  }

  std::string header_line() {
    if (cursor_ >= lines_.size()) fail(cursor_, 0, "missing header row");
    return lines_[cursor_++];
  }

  bool next_row(std::vector<std::string>& fields, std::vector<std::size_t>& cols,
                std::size_t* line_out, std::string* comment = nullptr) {
    while (cursor_ < lines_.size()) {
      const std::string& line = lines_[cursor_];
      if (line.empty()) {
        ++cursor_;
        continue;
      }
      if (line[0] == '#') {
        if (comment) {
          *comment = line.size() > 2 ? line.substr(2) : "";
          *line_out = cursor_++;
          fields.clear();
          return true;
        }
        ++cursor_;
        continue;
      }
      fields.clear();
      cols.clear();
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = line.find(',', start);
        cols.push_back(start);
        if (comma == std::string::npos) {
          fields.push_back(line.substr(start));
          break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
      }
      *line_out = cursor_++;
      return true;
    }
    return false;
  }

  double parse_real(const std::string& field, std::size_t line, std::size_t col) const {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) fail(line, col, "expected a real number, found '" + field + "'");
    return value;
  }

  void require_fields(const std::vector<std::string>& fields, std::size_t count, std::size_t line) const {
    if (fields.size() != count)
      fail(line, 0,
           "expected " + std::to_string(count) + " fields, found " + std::to_string(fields.size()));
  }

 private:
  std::string path_;
  std::vector<std::string> lines_;
  std::size_t cursor_ = 0;
};

json parse_json(const std::string& path, const std::string& expected_schema) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& err) {
    raise(Errc::ParseError, path + ": " + err.what());
  }
  if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_string())
    raise(Errc::ParseError, path + ": missing 'schema' field");
  if (doc["schema"] != expected_schema)
    raise(Errc::ParseError, path + ": expected schema '" + expected_schema + "', found '" +
                                std::string(doc["schema"]) + "'");
  return doc;
}

Eigen::Matrix3d json_matrix3(const json& value, const std::string& context) {
  if (!value.is_array() || value.size() != 3)
    raise(Errc::ParseError, context + " must be a 3x3 array");
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) {
    const json& row = value[i];
    if (!row.is_array() || row.size() != 3)
      raise(Errc::ParseError, context + " must be a 3x3 array");
    for (int j = 0; j < 3; ++j) {
      if (!row[j].is_number()) raise(Errc::ParseError, context + " entries must be numbers");
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

Eigen::Vector3d json_vector3(const json& value, const std::string& context) {
  if (!value.is_array() || value.size() != 3)
    raise(Errc::ParseError, context + " must be a 3-vector");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!value[i].is_number()) raise(Errc::ParseError, context + " entries must be numbers");
    v[i] = value[i].get<double>();
  }
  return v;
}

json matrix3_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

json vector3_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);  // best effort
  }
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::IoError, "cannot open '" + temp.string() + "' for writing");
    out << content;
    if (!out.good()) raise(Errc::IoError, "failed writing '" + temp.string() + "'");
  }
  fs::rename(temp, target, ec);
  if (ec) raise(Errc::IoError, "cannot rename '" + temp.string() + "' to '" + path + "'");
}

std::string peek_schema(const std::string& path) {
  const std::string content = read_file(path);
  const std::size_t end = content.find('\n');
  std::string line = content.substr(0, end);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("# ", 0) == 0) return line.substr(2);
  if (!line.empty() && line.front() == '{') {
    try {
      const json doc = json::parse(content);
      if (doc.contains("schema") && doc["schema"].is_string()) return doc["schema"];
    } catch (const json::parse_error&) {
    }
  }
  raise(Errc::ParseError, path + ":1:1: missing schema line");
}

const char* match_source_name(MatchSource source) {
  switch (source) {
    case MatchSource::Naive: return "naive";
    case MatchSource::OT: return "ot";
    case MatchSource::POT: return "pot";
    case MatchSource::HOT: return "hot";
    case MatchSource::HOTPOT: return "hot-pot";
  }
  return "?";
}

std::optional<MatchSource> match_source_from_name(const std::string& name) {
  if (name == "naive") return MatchSource::Naive;
  if (name == "ot") return MatchSource::OT;
  if (name == "pot") return MatchSource::POT;
  if (name == "hot") return MatchSource::HOT;
  if (name == "hot-pot") return MatchSource::HOTPOT;
  return std::nullopt;
}

LabeledCloud load_points(const std::string& path) {
  CsvReader reader(path, read_file(path));
  reader.expect_schema(kPointsSchema);
  reader.expect_header("point_id,object_id,u,v");

  std::vector<std::string> order;
  std::map<std::string, LabeledObject> objects;
  std::vector<std::string> fields;
  std::vector<std::size_t> cols;
  std::size_t line = 0;
  while (reader.next_row(fields, cols, &line)) {
    reader.require_fields(fields, 4, line);
    const double u = reader.parse_real(fields[2], line, cols[2]);
    const double v = reader.parse_real(fields[3], line, cols[3]);
    if (!std::isfinite(u) || !std::isfinite(v))
      reader.fail(line, cols[2], "point coordinates must be finite");
    auto [it, inserted] = objects.try_emplace(fields[1], LabeledObject{fields[1], {}, {}});
    if (inserted) order.push_back(fields[1]);
    it->second.points.push_back({u, v});
    it->second.point_ids.push_back(fields[0]);
  }
  if (order.empty()) raise(Errc::ParseError, path + ": no point rows");

  std::vector<LabeledObject> list;
  list.reserve(order.size());
  for (const std::string& id : order) list.push_back(std::move(objects[id]));
  return LabeledCloud::from(std::move(list));
}

void save_points(const std::string& path, const LabeledCloud& cloud) {
  std::string out = "# ";
  out += kPointsSchema;
  out += "\npoint_id,object_id,u,v\n";
  for (const LabeledObject& obj : cloud.objects()) {
    validate_id(obj.object_id);
    for (std::size_t p = 0; p < obj.points.size(); ++p) {
      validate_id(obj.point_ids[p]);
      out += obj.point_ids[p] + "," + obj.object_id + "," + format_real(obj.points[p].u) + "," +
             format_real(obj.points[p].v) + "\n";
    }
  }
  atomic_write(path, out);
}

StereoRig load_calibration(const std::string& path) {
  const json doc = parse_json(path, kCalibrationSchema);
  try {
    const IntrinsicMatrix k_left = IntrinsicMatrix::from(json_matrix3(doc.at("k_left"), "k_left"));
    const IntrinsicMatrix k_right =
        IntrinsicMatrix::from(json_matrix3(doc.at("k_right"), "k_right"));
    if (doc.contains("r_left")) {
      return reduce_general_rig(k_left, k_right, json_matrix3(doc.at("r_left"), "r_left"),
                                json_matrix3(doc.at("r_right"), "r_right"),
                                json_vector3(doc.at("t_left"), "t_left"),
                                json_vector3(doc.at("t_right"), "t_right"));
    }
    return {k_left, k_right,
            RelativePose::from(json_matrix3(doc.at("r"), "r"), json_vector3(doc.at("t"), "t"))};
  } catch (const json::exception& err) {
    raise(Errc::CalibrationError, path + ": " + err.what());
  } catch (const Error& err) {
    if (err.code() == Errc::ValidationError || err.code() == Errc::ParseError)
      raise(Errc::CalibrationError, path + ": " + err.what());
    throw;
  }
}

void save_calibration(const std::string& path, const StereoRig& rig) {
  json doc;
  doc["schema"] = kCalibrationSchema;
  doc["k_left"] = matrix3_json(rig.k_left.entries());
  doc["k_right"] = matrix3_json(rig.k_right.entries());
  doc["r"] = matrix3_json(rig.pose.rotation());
  doc["t"] = vector3_json(rig.pose.translation());
  atomic_write(path, doc.dump(2) + "\n");
}

std::string calibration_hash(const StereoRig& rig) {
  std::string canon;
  const auto append3x3 = [&canon](const Eigen::Matrix3d& m) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) canon += format_real(m(i, j)) + ";";
  };
  append3x3(rig.k_left.entries());
  append3x3(rig.k_right.entries());
  append3x3(rig.pose.rotation());
  for (int i = 0; i < 3; ++i) canon += format_real(rig.pose.translation()[i]) + ";";

  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char c : canon) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

void save_cost_matrix(const std::string& path, const CostMatrix& matrix,
                      const std::vector<std::string>& left_ids,
                      const std::vector<std::string>& right_ids,
                      const std::string& calibration_hash) {
  if (static_cast<int>(left_ids.size()) != matrix.rows() ||
      static_cast<int>(right_ids.size()) != matrix.cols())
    raise(Errc::ShapeMismatch, "id lists do not match the cost matrix shape");
  for (const auto& id : left_ids) validate_id(id);
  for (const auto& id : right_ids) validate_id(id);

  std::string out = "# ";
  out += kCostSchema;
  out += "\n";
  if (matrix.distance_kind()) {
    const DistanceSpec& spec = *matrix.distance_kind();
    out += std::string("# distance ") + distance_name(spec.kind) + "\n";
    if (spec.reg) {
      out += "# beta " + format_real(spec.reg->beta) + "\n";
      out += "# gamma1 " + format_real(spec.reg->gamma_low) + "\n";
      out += "# gamma2 " + format_real(spec.reg->gamma_high) + "\n";
    }
  }
  if (!calibration_hash.empty()) out += "# calibration " + calibration_hash + "\n";

  out += "left_id";
  for (const std::string& id : right_ids) out += "," + id;
  out += "\n";
  for (int i = 0; i < matrix.rows(); ++i) {
    out += left_ids[i];
    for (int j = 0; j < matrix.cols(); ++j) out += "," + format_real(matrix.at(i, j));
    out += "\n";
  }
  atomic_write(path, out);
}

CostFileData load_cost_matrix(const std::string& path) {
  CsvReader reader(path, read_file(path));
  reader.expect_schema(kCostSchema);
  const auto meta = reader.metadata();

  std::optional<DistanceSpec> spec;
  if (const auto it = meta.find("distance"); it != meta.end()) {
    const auto kind = distance_from_name(it->second);
    if (!kind) raise(Errc::ParseError, path + ": unknown distance '" + it->second + "'");
    if (*kind == DistanceKind::RegularizedRay) {
      const auto need = [&](const char* key) {
        const auto m = meta.find(key);
        if (m == meta.end())
          raise(Errc::ParseError, path + ": regularized distance needs '# " + std::string(key) + "'");
        double value = 0.0;
        const char* begin = m->second.data();
        const char* end = begin + m->second.size();
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end)
          raise(Errc::ParseError, path + ": bad value for '# " + std::string(key) + "'");
        return value;
      };
      spec = DistanceSpec::regularized(
          DepthRegParams::from(need("beta"), need("gamma1"), need("gamma2")));
    } else {
      spec = DistanceSpec{*kind, std::nullopt};
    }
  }

  const std::string header = reader.header_line();
  std::vector<std::string> right_ids;
  {
    std::size_t start = header.find(',');
    if (header.substr(0, start) != "left_id")
      raise(Errc::ParseError, path + ": cost header must start with 'left_id'");
    while (start != std::string::npos) {
      const std::size_t next = header.find(',', start + 1);
      right_ids.push_back(header.substr(start + 1, next == std::string::npos
                                                       ? std::string::npos
                                                       : next - start - 1));
      start = next;
    }
  }
  if (right_ids.empty()) raise(Errc::ParseError, path + ": cost header has no columns");

  std::vector<std::string> left_ids;
  std::vector<double> values;
  std::vector<std::string> fields;
  std::vector<std::size_t> cols;
  std::size_t line = 0;
  while (reader.next_row(fields, cols, &line)) {
    reader.require_fields(fields, right_ids.size() + 1, line);
    left_ids.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j)
      values.push_back(reader.parse_real(fields[j], line, cols[j]));
  }
  if (left_ids.empty()) raise(Errc::ParseError, path + ": no cost rows");

  CostFileData data;
  data.matrix = CostMatrix::from(static_cast<int>(left_ids.size()),
                                 static_cast<int>(right_ids.size()), std::move(values), spec);
  data.left_ids = std::move(left_ids);
  data.right_ids = std::move(right_ids);
  if (const auto it = meta.find("calibration"); it != meta.end()) data.calibration_hash = it->second;
  return data;
}

void save_plan(const std::string& path, const std::vector<PlanFileEntry>& entries) {
  std::string out = "# ";
  out += kPlanSchema;
  out += "\nleft_id,right_id,mass\n";
  for (const PlanFileEntry& e : entries) {
    validate_id(e.left_id);
    validate_id(e.right_id);
    if (!(e.mass > 0.0)) raise(Errc::ValidationError, "plan masses must be positive");
    out += e.left_id + "," + e.right_id + "," + format_real(e.mass) + "\n";
  }
  atomic_write(path, out);
}

std::vector<PlanFileEntry> load_plan(const std::string& path) {
  CsvReader reader(path, read_file(path));
  reader.expect_schema(kPlanSchema);
  reader.expect_header("left_id,right_id,mass");
  std::vector<PlanFileEntry> entries;
  std::vector<std::string> fields;
  std::vector<std::size_t> cols;
  std::size_t line = 0;
  while (reader.next_row(fields, cols, &line)) {
    reader.require_fields(fields, 3, line);
    const double mass = reader.parse_real(fields[2], line, cols[2]);
    if (!(mass > 0.0)) reader.fail(line, cols[2], "plan masses must be positive");
    entries.push_back({fields[0], fields[1], mass});
  }
  return entries;
}

void save_matching(const std::string& path, const std::vector<IdPair>& pairs, MatchSource source) {
  std::string out = "# ";
  out += kMatchingSchema;
  out += "\n# source ";
  out += match_source_name(source);
  out += "\nleft_id,right_id\n";
  for (const auto& [l, r] : pairs) {
    validate_id(l);
    validate_id(r);
    out += l + "," + r + "\n";
  }
  atomic_write(path, out);
}

MatchingFileData load_matching(const std::string& path) {
  CsvReader reader(path, read_file(path));
  reader.expect_schema(kMatchingSchema);
  const auto meta = reader.metadata();
  MatchingFileData data;
  if (const auto it = meta.find("source"); it != meta.end()) {
    const auto source = match_source_from_name(it->second);
    if (!source) raise(Errc::ParseError, path + ": unknown matching source '" + it->second + "'");
    data.source = *source;
  }
  reader.expect_header("left_id,right_id");
  std::vector<std::string> fields;
  std::vector<std::size_t> cols;
  std::size_t line = 0;
  while (reader.next_row(fields, cols, &line)) {
    reader.require_fields(fields, 2, line);
    data.pairs.push_back({fields[0], fields[1]});
  }
  return data;
}

void save_cloud(const std::string& path, const CloudFileData& data) {
  std::string out = "# ";
  out += kCloudSchema;
  out += "\nleft_id,right_id,x,y,z,in_front\n";
  for (const CloudRow& row : data.rows) {
    validate_id(row.left_id);
    validate_id(row.right_id);
    out += row.left_id + "," + row.right_id + "," + format_real(row.point.x()) + "," +
           format_real(row.point.y()) + "," + format_real(row.point.z()) + "," +
           (row.in_front ? "true" : "false") + "\n";
  }
  for (const SkippedRow& skip : data.skipped)
    out += "# skipped " + skip.left_id + " " + skip.right_id + " " + skip.reason + "\n";
  atomic_write(path, out);
}

CloudFileData load_cloud(const std::string& path) {
  CsvReader reader(path, read_file(path));
  reader.expect_schema(kCloudSchema);
  reader.expect_header("left_id,right_id,x,y,z,in_front");
  CloudFileData data;
  std::vector<std::string> fields;
  std::vector<std::size_t> cols;
  std::size_t line = 0;
  std::string comment;
  while (reader.next_row(fields, cols, &line, &comment)) {
    if (fields.empty()) {
      std::istringstream parts(comment);
      std::string tag, l, r, reason;
      parts >> tag >> l >> r >> reason;
      if (tag == "skipped") data.skipped.push_back({l, r, reason});
      continue;
    }
    reader.require_fields(fields, 6, line);
    CloudRow row;
    row.left_id = fields[0];
    row.right_id = fields[1];
    row.point = {reader.parse_real(fields[2], line, cols[2]),
                 reader.parse_real(fields[3], line, cols[3]),
                 reader.parse_real(fields[4], line, cols[4])};
    if (fields[5] == "true") row.in_front = true;
    else if (fields[5] == "false") row.in_front = false;
    else reader.fail(line, cols[5], "in_front must be 'true' or 'false'");
    data.rows.push_back(std::move(row));
  }
  return data;
}

void save_metrics(const std::string& path, const MetricsFileData& data) {
  const MetricsReport& report = data.report;
  if (report.pointwise_mismatch < 0.0 || report.pointwise_mismatch > 1.0)
    raise(Errc::ValidationError, "pointwise mismatch must lie in [0, 1]");
  if (report.objectwise_mismatch &&
      (*report.objectwise_mismatch < 0.0 || *report.objectwise_mismatch > 1.0))
    raise(Errc::ValidationError, "objectwise mismatch must lie in [0, 1]");

  json doc;
  doc["schema"] = kMetricsSchema;
  doc["pointwise_mismatch"] = report.pointwise_mismatch;
  doc["objectwise_mismatch"] =
      report.objectwise_mismatch ? json(*report.objectwise_mismatch) : json(nullptr);
  doc["w2_squared"] = report.w2_squared ? json(*report.w2_squared) : json(nullptr);
  doc["matched_count"] = report.matched_count;
  doc["skipped_triangulations"] = report.skipped_triangulations;
  doc["config"] = data.config_echo;
  doc["seed"] = data.seed ? json(*data.seed) : json(nullptr);
  atomic_write(path, doc.dump(2) + "\n");
}

MetricsFileData load_metrics(const std::string& path) {
  const json doc = parse_json(path, kMetricsSchema);
  MetricsFileData data;
  try {
    data.report.pointwise_mismatch = doc.at("pointwise_mismatch").get<double>();
    if (!doc.at("objectwise_mismatch").is_null())
      data.report.objectwise_mismatch = doc.at("objectwise_mismatch").get<double>();
    if (!doc.at("w2_squared").is_null())
      data.report.w2_squared = doc.at("w2_squared").get<double>();
    data.report.matched_count = doc.at("matched_count").get<int>();
    data.report.skipped_triangulations = doc.at("skipped_triangulations").get<int>();
    data.config_echo = doc.at("config").get<std::string>();
    if (!doc.at("seed").is_null()) data.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const json::exception& err) {
    raise(Errc::ParseError, path + ": " + err.what());
  }
  return data;
}

namespace {

json sweep_config_json(const SweepConfig& cfg) {
  json doc;
  doc["schema"] = kConfigSchema;
  doc["n_scenes"] = cfg.n_scenes;
  doc["n_objects"] = cfg.n_objects;
  doc["points_per_object"] = cfg.points_per_object;
  doc["center_min"] = vector3_json(cfg.center_min);
  doc["center_max"] = vector3_json(cfg.center_max);
  doc["radius_min"] = cfg.radius_min;
  doc["radius_max"] = cfg.radius_max;
  doc["sigmas"] = cfg.sigmas;
  doc["max_rotation_deg"] = cfg.max_rotation_deg;
  doc["base_seed"] = cfg.base_seed;
  json distances = json::array();
  for (DistanceKind k : cfg.distances) distances.push_back(distance_name(k));
  doc["distances"] = distances;
  json matchers = json::array();
  for (Matcher m : cfg.matchers) matchers.push_back(matcher_name(m));
  doc["matchers"] = matchers;
  doc["reg"] = {{"beta", cfg.reg.beta}, {"gamma1", cfg.reg.gamma_low}, {"gamma2", cfg.reg.gamma_high}};
  return doc;
}

SweepConfig sweep_config_from_json(const json& doc, const std::string& context) {
  SweepConfig cfg;
  try {
    if (doc.contains("n_scenes")) cfg.n_scenes = doc["n_scenes"].get<int>();
    if (doc.contains("n_objects")) cfg.n_objects = doc["n_objects"].get<int>();
    if (doc.contains("points_per_object")) cfg.points_per_object = doc["points_per_object"].get<int>();
    if (doc.contains("center_min")) cfg.center_min = json_vector3(doc["center_min"], "center_min");
    if (doc.contains("center_max")) cfg.center_max = json_vector3(doc["center_max"], "center_max");
    if (doc.contains("radius_min")) cfg.radius_min = doc["radius_min"].get<double>();
    if (doc.contains("radius_max")) cfg.radius_max = doc["radius_max"].get<double>();
    if (doc.contains("sigmas")) cfg.sigmas = doc["sigmas"].get<std::vector<double>>();
    if (doc.contains("max_rotation_deg")) cfg.max_rotation_deg = doc["max_rotation_deg"].get<double>();
    if (doc.contains("base_seed")) cfg.base_seed = doc["base_seed"].get<std::uint64_t>();
    if (doc.contains("distances")) {
      cfg.distances.clear();
      for (const auto& name : doc["distances"]) {
        const auto kind = distance_from_name(name.get<std::string>());
        if (!kind) raise(Errc::ParseError, context + ": unknown distance '" +
                                               name.get<std::string>() + "'");
        cfg.distances.push_back(*kind);
      }
    }
    if (doc.contains("matchers")) {
      cfg.matchers.clear();
      for (const auto& name : doc["matchers"]) {
        const auto matcher = matcher_from_name(name.get<std::string>());
        if (!matcher)
          raise(Errc::ParseError, context + ": unknown matcher '" + name.get<std::string>() + "'");
        cfg.matchers.push_back(*matcher);
      }
    }
    if (doc.contains("reg")) {
      const json& reg = doc["reg"];
      cfg.reg = DepthRegParams::from(reg.at("beta").get<double>(), reg.at("gamma1").get<double>(),
                                     reg.at("gamma2").get<double>());
    }
  } catch (const json::exception& err) {
    raise(Errc::ParseError, context + ": " + err.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace

SweepConfig load_sweep_config(const std::string& path) {
  return sweep_config_from_json(parse_json(path, kConfigSchema), path);
}

void save_sweep_config(const std::string& path, const SweepConfig& cfg) {
  atomic_write(path, sweep_config_json(cfg).dump(2) + "\n");
}

void save_sweep_csv(const std::string& path, const SweepResult& result) {
  std::string out = "# ";
  out += kSweepSchema;
  out += "\n# version ";
  out += kVersion;
  out += "\n# config ";
  out += sweep_config_json(result.config).dump();
  out += "\n";
  out +=
      "distance,matcher,sigma,mismatch_mean_pct,mismatch_std_pct,w2_mean,w2_std,"
      "object_mismatch_mean_pct,object_mismatch_std_pct\n";
  for (const SweepRow& row : result.rows) {
    out += std::string(distance_name(row.distance)) + "," + matcher_name(row.matcher) + "," +
           format_real(row.sigma) + "," + format_real(row.mismatch_mean_pct) + "," +
           format_real(row.mismatch_std_pct) + "," + format_real(row.w2_mean) + "," +
           format_real(row.w2_std) + ",";
    if (row.object_mismatch_mean_pct) out += format_real(*row.object_mismatch_mean_pct);
    out += ",";
    if (row.object_mismatch_std_pct) out += format_real(*row.object_mismatch_std_pct);
    out += "\n";
  }
  atomic_write(path, out);
}

SweepResult load_sweep_csv(const std::string& path) {
  CsvReader reader(path, read_file(path));
  reader.expect_schema(kSweepSchema);
  const auto meta = reader.metadata();
  SweepResult result;
  if (const auto it = meta.find("config"); it != meta.end()) {
    try {
      result.config = sweep_config_from_json(json::parse(it->second), path);
    } catch (const json::parse_error& err) {
      raise(Errc::ParseError, path + ": bad config echo: " + err.what());
    }
  }
  reader.expect_header(
      "distance,matcher,sigma,mismatch_mean_pct,mismatch_std_pct,w2_mean,w2_std,"
      "object_mismatch_mean_pct,object_mismatch_std_pct");

  std::vector<std::string> fields;
  std::vector<std::size_t> cols;
  std::size_t line = 0;
  while (reader.next_row(fields, cols, &line)) {
    reader.require_fields(fields, 9, line);
    SweepRow row;
    const auto kind = distance_from_name(fields[0]);
    const auto matcher = matcher_from_name(fields[1]);
    if (!kind) reader.fail(line, cols[0], "unknown distance '" + fields[0] + "'");
    if (!matcher) reader.fail(line, cols[1], "unknown matcher '" + fields[1] + "'");
    row.distance = *kind;
    row.matcher = *matcher;
    row.sigma = reader.parse_real(fields[2], line, cols[2]);
    row.mismatch_mean_pct = reader.parse_real(fields[3], line, cols[3]);
    row.mismatch_std_pct = reader.parse_real(fields[4], line, cols[4]);
    row.w2_mean = reader.parse_real(fields[5], line, cols[5]);
    row.w2_std = reader.parse_real(fields[6], line, cols[6]);
    if (!fields[7].empty()) row.object_mismatch_mean_pct = reader.parse_real(fields[7], line, cols[7]);
    if (!fields[8].empty()) row.object_mismatch_std_pct = reader.parse_real(fields[8], line, cols[8]);
    result.rows.push_back(row);
  }
  return result;
}

void save_sweep_svg(const std::string& path, const SweepResult& result) {
  // Mean pointwise mismatch against the noise level, one polyline per
  // (distance, matcher) group, noise levels placed at equidistant ticks.
  const std::vector<double>& sigmas = result.config.sigmas;
  const int width = 760, height = 460;
  const double left = 70, right = 220, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const std::size_t ticks = std::max<std::size_t>(sigmas.size(), 2);

  const char* palette[] = {"#1b6ca8", "#53a548", "#c1292e", "#73628a", "#e09f3e",
                           "#2a9d8f", "#9b2226", "#415a77", "#6a994e"};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const auto xpos = [&](std::size_t idx) {
    return left + plot_w * static_cast<double>(idx) / static_cast<double>(ticks - 1);
  };
  const auto ypos = [&](double pct) { return top + plot_h * (1.0 - pct / 100.0); };

  // axes and grid
  for (int g = 0; g <= 10; g += 2) {
    const double y = ypos(10.0 * g);
    svg += "<line x1=\"" + format_real(left) + "\" y1=\"" + format_real(y) + "\" x2=\"" +
           format_real(left + plot_w) + "\" y2=\"" + format_real(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + format_real(left - 8) + "\" y=\"" + format_real(y + 4) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" +
           std::to_string(10 * g) + "%</text>\n";
  }
  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    svg += "<text x=\"" + format_real(xpos(s)) + "\" y=\"" + format_real(top + plot_h + 20) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" +
           format_real(sigmas[s]) + "</text>\n";
  }
  svg += "<text x=\"" + format_real(left + plot_w / 2) + "\" y=\"" + format_real(top + plot_h + 40) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">noise sigma</text>\n";
  svg += "<line x1=\"" + format_real(left) + "\" y1=\"" + format_real(top) + "\" x2=\"" +
         format_real(left) + "\" y2=\"" + format_real(top + plot_h) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + format_real(left) + "\" y1=\"" + format_real(top + plot_h) + "\" x2=\"" +
         format_real(left + plot_w) + "\" y2=\"" + format_real(top + plot_h) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // group rows by (distance, matcher) preserving order
  std::vector<std::pair<std::string, std::vector<const SweepRow*>>> groups;
  for (const SweepRow& row : result.rows) {
    const std::string key = std::string(distance_name(row.distance)) + " " + matcher_name(row.matcher);
    if (groups.empty() || groups.back().first != key) groups.push_back({key, {}});
    groups.back().second.push_back(&row);
  }

  int color = 0;
  double legend_y = top + 10;
  for (const auto& [key, rows] : groups) {
    const char* stroke = palette[color % 9];
    std::string points;
    for (const SweepRow* row : rows) {
      std::size_t idx = 0;
      for (std::size_t s = 0; s < sigmas.size(); ++s)
        if (sigmas[s] == row->sigma) idx = s;
      points += format_real(xpos(idx)) + "," + format_real(ypos(row->mismatch_mean_pct)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    svg += "<line x1=\"" + format_real(left + plot_w + 16) + "\" y1=\"" + format_real(legend_y - 4) +
           "\" x2=\"" + format_real(left + plot_w + 44) + "\" y2=\"" + format_real(legend_y - 4) +
           "\" stroke=\"" + stroke + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + format_real(left + plot_w + 50) + "\" y=\"" + format_real(legend_y) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + key + "</text>\n";
    legend_y += 18;
    ++color;
  }
  svg += "</svg>\n";
  atomic_write(path, svg);
}

}  // namespace otm::io
