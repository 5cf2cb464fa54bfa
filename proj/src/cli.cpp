#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "otmatch/cost.hpp"
#include "otmatch/evaluation.hpp"
#include "otmatch/hierarchy.hpp"
#include "otmatch/io.hpp"
#include "otmatch/simulation.hpp"
#include "otmatch/version.hpp"

namespace otm::cli {

namespace {

using nlohmann::json;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::ValidationError:
    case Errc::CalibrationError:
      return 2;
    case Errc::IoError:
      return 4;
    default:
      return 3;  // infeasible or degenerate inputs
  }
}

/// Flat key/value defaults loaded from --config (or $OTMATCH_CONFIG).
/// Flags always win over config values.
class ConfigDefaults {
 public:
  void load(const std::string& path) {
    doc_ = json::parse(io_read(path));
    if (!doc_.is_object() || doc_.value("schema", "") != std::string("otmatch.config.v1"))
      raise(Errc::ParseError, path + ": expected schema 'otmatch.config.v1'");
    path_ = path;
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  template <typename T>
  T get(const std::string& key) const {
    try {
      return doc_.at(key).get<T>();
    } catch (const json::exception& err) {
      raise(Errc::ParseError, path_ + ": bad value for '" + key + "': " + err.what());
    }
  }

  const json& raw() const { return doc_; }

 private:
  static std::string io_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::IoError, "cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }

  json doc_ = json::object();
  std::string path_;
};

ConfigDefaults load_defaults(const CLI::Option* config_opt, const std::string& config_path) {
  ConfigDefaults defaults;
  if (config_opt->count() > 0) {
    defaults.load(config_path);
  } else if (const char* env = std::getenv("OTMATCH_CONFIG"); env != nullptr && *env != '\0') {
    defaults.load(env);
  }
  return defaults;
}

std::string resolve_string(const CLI::Option* opt, const std::string& value,
                           const ConfigDefaults& defaults, const std::string& key,
                           const std::string& flag, bool required) {
  if (opt->count() > 0) return value;
  if (defaults.has(key)) return defaults.get<std::string>(key);
  if (required) raise(Errc::ValidationError, "missing " + flag);
  return value;
}

std::optional<double> resolve_real(const CLI::Option* opt, double value,
                                   const ConfigDefaults& defaults, const std::string& key) {
  if (opt->count() > 0) return value;
  if (defaults.has(key)) return defaults.get<double>(key);
  return std::nullopt;
}

struct DistanceFlags {
  std::string distance;
  double beta = 0.0, gamma1 = 0.0, gamma2 = 0.0;
  CLI::Option* distance_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* gamma1_opt = nullptr;
  CLI::Option* gamma2_opt = nullptr;

  void attach(CLI::App* cmd) {
    distance_opt = cmd->add_option("--distance", distance, "Cost function: epi, ray, or reg");
    beta_opt = cmd->add_option("--beta", beta, "Depth penalty strength (reg only)");
    gamma1_opt = cmd->add_option("--gamma1", gamma1, "Lower depth threshold (reg only)");
    gamma2_opt = cmd->add_option("--gamma2", gamma2, "Upper depth threshold (reg only)");
  }

  DistanceSpec resolve(const ConfigDefaults& defaults) const {
    const std::string name =
        resolve_string(distance_opt, distance, defaults, "distance", "--distance", true);
    const auto kind = distance_from_name(name);
    if (!kind) raise(Errc::ValidationError, "unknown distance '" + name + "' (use epi, ray, or reg)");

    const auto b = resolve_real(beta_opt, beta, defaults, "beta");
    const auto g1 = resolve_real(gamma1_opt, gamma1, defaults, "gamma1");
    const auto g2 = resolve_real(gamma2_opt, gamma2, defaults, "gamma2");
    if (*kind != DistanceKind::RegularizedRay) {
      if (beta_opt->count() || gamma1_opt->count() || gamma2_opt->count())
        raise(Errc::ValidationError, "--beta/--gamma1/--gamma2 require --distance reg");
      return {*kind, std::nullopt};
    }
    if (!b) raise(Errc::ValidationError, "missing --beta (required with --distance reg)");
    if (!g1) raise(Errc::ValidationError, "missing --gamma1 (required with --distance reg)");
    if (!g2) raise(Errc::ValidationError, "missing --gamma2 (required with --distance reg)");
    return DistanceSpec::regularized(DepthRegParams::from(*b, *g1, *g2));
  }
};

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return parts;
}

double parse_real_arg(const std::string& text, const std::string& flag) {
  double value = 0.0;
  const char* begin = text.data();
  const auto [ptr, ec] = std::from_chars(begin, begin + text.size(), value);
  if (ec != std::errc() || ptr != begin + text.size())
    raise(Errc::ValidationError, flag + ": expected a real number, found '" + text + "'");
  return value;
}

std::unordered_map<std::string, int> id_index(const std::vector<std::string>& ids) {
  std::unordered_map<std::string, int> map;
  for (std::size_t k = 0; k < ids.size(); ++k) map[ids[k]] = static_cast<int>(k);
  return map;
}

std::vector<io::PlanFileEntry> plan_to_file_entries(const TransportPlan& plan,
                                                    const std::vector<std::string>& left_ids,
                                                    const std::vector<std::string>& right_ids) {
  std::vector<io::PlanFileEntry> entries;
  entries.reserve(plan.entries.size());
  for (const PlanEntry& e : plan.entries)
    entries.push_back({left_ids[e.i], right_ids[e.j], e.mass});
  return entries;
}

// ---------------------------------------------------------------- cost

struct CostCommand {
  std::string left, right, calib, out, config;
  DistanceFlags distance;
  CLI::Option* config_opt = nullptr;

  void attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("cost", "Write the pairwise cost matrix for two point files");
    cmd->add_option("--left", left, "Left camera points (CSV)")->required();
    cmd->add_option("--right", right, "Right camera points (CSV)")->required();
    cmd->add_option("--calib", calib, "Calibration file (JSON)")->required();
    cmd->add_option("--out", out, "Output cost matrix (CSV)")->required();
    distance.attach(cmd);
    config_opt = cmd->add_option("--config", config, "Config file with flag defaults");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const ConfigDefaults defaults = load_defaults(config_opt, config);
    const DistanceSpec spec = distance.resolve(defaults);
    const LabeledCloud left_cloud = io::load_points(left);
    const LabeledCloud right_cloud = io::load_points(right);
    const StereoRig rig = io::load_calibration(calib);
    const CostMatrix cost =
        pairwise_cost(rig, spec, left_cloud.flat_points(), right_cloud.flat_points());
    io::save_cost_matrix(out, cost, left_cloud.flat_ids(), right_cloud.flat_ids(),
                         io::calibration_hash(rig));
    std::cout << "wrote " << out << " (" << cost.rows() << "x" << cost.cols() << ")\n";
  }
};

// ---------------------------------------------------------------- match

struct MatchCommand {
  std::string left, right, calib, matcher, out_plan = "plan.csv", out_matching = "matching.csv";
  std::string config;
  double mass = 0.0;
  DistanceFlags distance;
  CLI::Option* matcher_opt = nullptr;
  CLI::Option* mass_opt = nullptr;
  CLI::Option* config_opt = nullptr;

  void attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("match", "Match two point files and write plan + matching");
    cmd->add_option("--left", left, "Left camera points (CSV)")->required();
    cmd->add_option("--right", right, "Right camera points (CSV)")->required();
    cmd->add_option("--calib", calib, "Calibration file (JSON)")->required();
    matcher_opt = cmd->add_option("--matcher", matcher, "Matcher: naive, ot, or pot");
    mass_opt = cmd->add_option("--mass", mass, "Transported mass (pot only; default min/max)");
    cmd->add_option("--out-plan", out_plan, "Output plan file (CSV)");
    cmd->add_option("--out-matching", out_matching, "Output matching file (CSV)");
    distance.attach(cmd);
    config_opt = cmd->add_option("--config", config, "Config file with flag defaults");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const ConfigDefaults defaults = load_defaults(config_opt, config);
    const DistanceSpec spec = distance.resolve(defaults);
    const std::string matcher_name =
        resolve_string(matcher_opt, matcher, defaults, "matcher", "--matcher", true);
    if (matcher_name != "naive" && matcher_name != "ot" && matcher_name != "pot")
      raise(Errc::ValidationError, "unknown matcher '" + matcher_name + "' (use naive, ot, or pot)");
    const auto mass_value = resolve_real(mass_opt, mass, defaults, "mass");
    if (mass_value && matcher_name != "pot")
      raise(Errc::ValidationError, "--mass is only valid with --matcher pot");

    const LabeledCloud left_cloud = io::load_points(left);
    const LabeledCloud right_cloud = io::load_points(right);
    const StereoRig rig = io::load_calibration(calib);
    const std::vector<std::string> left_ids = left_cloud.flat_ids();
    const std::vector<std::string> right_ids = right_cloud.flat_ids();
    const CostMatrix cost =
        pairwise_cost(rig, spec, left_cloud.flat_points(), right_cloud.flat_points());

    TransportPlan plan;
    Matching matching;
    if (matcher_name == "naive") {
      matching = naive_match(cost);
      // the coupling induced by the greedy pairs, at the default mass scale
      const double pair_mass = 1.0 / std::max(cost.rows(), cost.cols());
      plan.rows = cost.rows();
      plan.cols = cost.cols();
      for (const auto& [i, j] : matching.pairs) plan.entries.push_back({i, j, pair_mass});
      plan.total_mass = pair_mass * static_cast<double>(matching.pairs.size());
      plan.objective = plan_objective(cost, plan);
    } else if (matcher_name == "ot") {
      plan = solve_ot(cost, MarginalWeights::uniform(cost.rows(), cost.cols()));
      matching = binarize(plan, MatchSource::OT);
    } else {
      plan = mass_value ? solve_pot(cost, *mass_value) : solve_pot(cost);
      matching = binarize(plan, MatchSource::POT);
    }

    io::save_plan(out_plan, plan_to_file_entries(plan, left_ids, right_ids));
    io::save_matching(out_matching, to_id_pairs(matching, left_ids, right_ids), matching.source);
    std::cout << "wrote " << out_plan << " and " << out_matching << " (" << matching.pairs.size()
              << " pairs)\n";
  }
};

// ---------------------------------------------------------------- match-objects

struct MatchObjectsCommand {
  std::string left, right, calib, mode, out_dir, config;
  DistanceFlags distance;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* config_opt = nullptr;

  void attach(CLI::App& app) {
    CLI::App* cmd =
        app.add_subcommand("match-objects", "Hierarchical object matching over labeled points");
    cmd->add_option("--left", left, "Left camera points (CSV)")->required();
    cmd->add_option("--right", right, "Right camera points (CSV)")->required();
    cmd->add_option("--calib", calib, "Calibration file (JSON)")->required();
    mode_opt = cmd->add_option("--mode", mode, "Object-level solver: hot or hot-pot");
    cmd->add_option("--out-dir", out_dir, "Output directory")->required();
    distance.attach(cmd);
    config_opt = cmd->add_option("--config", config, "Config file with flag defaults");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const ConfigDefaults defaults = load_defaults(config_opt, config);
    const DistanceSpec spec = distance.resolve(defaults);
    const std::string mode_name = resolve_string(mode_opt, mode, defaults, "mode", "--mode", true);
    ObjectMatchMode object_mode;
    MatchSource source;
    if (mode_name == "hot") {
      object_mode = ObjectMatchMode::Balanced;
      source = MatchSource::HOT;
    } else if (mode_name == "hot-pot") {
      object_mode = ObjectMatchMode::Partial;
      source = MatchSource::HOTPOT;
    } else {
      raise(Errc::ValidationError, "unknown mode '" + mode_name + "' (use hot or hot-pot)");
    }

    const LabeledCloud left_cloud = io::load_points(left);
    const LabeledCloud right_cloud = io::load_points(right);
    const StereoRig rig = io::load_calibration(calib);

    std::vector<std::string> left_object_ids, right_object_ids;
    for (const LabeledObject& obj : left_cloud.objects()) left_object_ids.push_back(obj.object_id);
    for (const LabeledObject& obj : right_cloud.objects()) right_object_ids.push_back(obj.object_id);

    const ObjectCostMatrix costs = object_costs(rig, spec, left_cloud, right_cloud);
    const ObjectMatchResult result = match_objects(costs, object_mode);
    const GlobalPlan gp = global_plan(result.plan, costs, left_cloud, right_cloud);
    const Matching gm = global_matching(gp);

    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    io::save_plan((dir / "object_plan.csv").string(),
                  plan_to_file_entries(result.plan, left_object_ids, right_object_ids));
    io::save_matching((dir / "object_matching.csv").string(),
                      to_id_pairs(result.matching, left_object_ids, right_object_ids), source);
    std::vector<io::PlanFileEntry> global_entries;
    for (const GlobalPlanEntry& e : gp.entries)
      global_entries.push_back({e.left_id, e.right_id, e.mass});
    io::save_plan((dir / "global_plan.csv").string(), global_entries);
    io::save_matching((dir / "global_matching.csv").string(),
                      to_id_pairs(gm, left_cloud.flat_ids(), right_cloud.flat_ids()), source);
    std::cout << "wrote object_plan.csv, object_matching.csv, global_plan.csv, global_matching.csv"
              << " in " << out_dir << " (" << result.matching.pairs.size() << " object pairs, "
              << gm.pairs.size() << " point pairs)\n";
  }
};

// ---------------------------------------------------------------- triangulate

struct TriangulateCommand {
  std::string pairs, left, right, calib, out;

  void attach(CLI::App& app) {
    CLI::App* cmd =
        app.add_subcommand("triangulate", "Triangulate matched pairs into a 3D point file");
    cmd->add_option("--pairs", pairs, "Plan or matching file (CSV)")->required();
    cmd->add_option("--left", left, "Left camera points (CSV)")->required();
    cmd->add_option("--right", right, "Right camera points (CSV)")->required();
    cmd->add_option("--calib", calib, "Calibration file (JSON)")->required();
    cmd->add_option("--out", out, "Output 3D point file (CSV)")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    std::vector<IdPair> id_pairs;
    const std::string schema = io::peek_schema(pairs);
    if (schema == "otmatch.plan.v1") {
      for (const io::PlanFileEntry& e : io::load_plan(pairs))
        id_pairs.push_back({e.left_id, e.right_id});
    } else if (schema == "otmatch.matching.v1") {
      id_pairs = io::load_matching(pairs).pairs;
    } else {
      raise(Errc::ValidationError, pairs + ": expected a plan or matching file, found '" + schema + "'");
    }

    const LabeledCloud left_cloud = io::load_points(left);
    const LabeledCloud right_cloud = io::load_points(right);
    const StereoRig rig = io::load_calibration(calib);
    const std::vector<ImagePoint> left_points = left_cloud.flat_points();
    const std::vector<ImagePoint> right_points = right_cloud.flat_points();
    const auto left_index = id_index(left_cloud.flat_ids());
    const auto right_index = id_index(right_cloud.flat_ids());

    io::CloudFileData data;
    for (const auto& [lid, rid] : id_pairs) {
      const auto li = left_index.find(lid);
      const auto ri = right_index.find(rid);
      if (li == left_index.end())
        raise(Errc::ValidationError, "pair references unknown left id '" + lid + "'");
      if (ri == right_index.end())
        raise(Errc::ValidationError, "pair references unknown right id '" + rid + "'");
      try {
        const Triangulation tri =
            triangulate(rig, left_points[li->second], right_points[ri->second]);
        data.rows.push_back({lid, rid, tri.point, tri.in_front});
      } catch (const Error& err) {
        if (err.code() != Errc::ParallelRays) throw;
        data.skipped.push_back({lid, rid, "ParallelRays"});
      }
    }
    io::save_cloud(out, data);
    std::cout << "wrote " << out << " (" << data.rows.size() << " points, " << data.skipped.size()
              << " skipped)\n";
  }
};

// ---------------------------------------------------------------- evaluate

struct EvaluateCommand {
  std::string pred, gt, pred_objects, gt_objects, left, right, calib, gt_cloud, out;
  int n = 0, m = 0, n_objects = 0, m_objects = 0;
  std::uint64_t seed = 0;
  CLI::Option* pred_objects_opt = nullptr;
  CLI::Option* gt_objects_opt = nullptr;
  CLI::Option* n_objects_opt = nullptr;
  CLI::Option* m_objects_opt = nullptr;
  CLI::Option* left_opt = nullptr;
  CLI::Option* gt_cloud_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("evaluate", "Score a predicted matching against ground truth");
    cmd->add_option("--pred", pred, "Predicted matching file (CSV)")->required();
    cmd->add_option("--gt", gt, "Ground-truth matching file (CSV)")->required();
    cmd->add_option("--n", n, "Left point count")->required();
    cmd->add_option("--m", m, "Right point count")->required();
    pred_objects_opt = cmd->add_option("--pred-objects", pred_objects, "Predicted object matching");
    gt_objects_opt = cmd->add_option("--gt-objects", gt_objects, "Ground-truth object matching");
    n_objects_opt = cmd->add_option("--n-objects", n_objects, "Left object count");
    m_objects_opt = cmd->add_option("--m-objects", m_objects, "Right object count");
    left_opt = cmd->add_option("--left", left, "Left points (enables W2 evaluation)");
    cmd->add_option("--right", right, "Right points (enables W2 evaluation)");
    cmd->add_option("--calib", calib, "Calibration file (enables W2 evaluation)");
    gt_cloud_opt = cmd->add_option("--gt-cloud", gt_cloud, "Reference 3D cloud for W2 (otherwise the"
                                                          " ground-truth matching is triangulated)");
    cmd->add_option("--out", out, "Output metrics file (JSON)")->required();
    seed_opt = cmd->add_option("--seed", seed, "Seed to echo into the metrics file");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const std::vector<IdPair> pred_pairs = io::load_matching(pred).pairs;
    std::vector<IdPair> gt_object_pairs;
    if (gt_objects_opt->count() > 0) gt_object_pairs = io::load_matching(gt_objects).pairs;
    const GroundTruthCorrespondence gtc =
        GroundTruthCorrespondence::from(io::load_matching(gt).pairs, std::move(gt_object_pairs));

    io::MetricsFileData data;
    data.report.pointwise_mismatch = pointwise_mismatch(pred_pairs, gtc, n, m);
    data.report.matched_count = static_cast<int>(pred_pairs.size());

    if (pred_objects_opt->count() > 0) {
      if (gt_objects_opt->count() == 0)
        raise(Errc::ValidationError, "--pred-objects requires --gt-objects");
      if (n_objects_opt->count() == 0 || m_objects_opt->count() == 0)
        raise(Errc::ValidationError, "--pred-objects requires --n-objects and --m-objects");
      data.report.objectwise_mismatch =
          objectwise_mismatch(io::load_matching(pred_objects).pairs, gtc, n_objects, m_objects);
    }

    if (left_opt->count() > 0) {
      if (right.empty() || calib.empty())
        raise(Errc::ValidationError, "W2 evaluation needs --left, --right, and --calib together");
      const LabeledCloud left_cloud = io::load_points(left);
      const LabeledCloud right_cloud = io::load_points(right);
      const StereoRig rig = io::load_calibration(calib);
      const std::vector<ImagePoint> lp = left_cloud.flat_points();
      const std::vector<ImagePoint> rp = right_cloud.flat_points();
      const auto li = id_index(left_cloud.flat_ids());
      const auto ri = id_index(right_cloud.flat_ids());

      const auto to_matching = [&](const std::vector<IdPair>& pairs) {
        Matching matching;
        for (const auto& [l, r] : pairs) {
          const auto lit = li.find(l);
          const auto rit = ri.find(r);
          if (lit == li.end()) raise(Errc::ValidationError, "unknown left id '" + l + "'");
          if (rit == ri.end()) raise(Errc::ValidationError, "unknown right id '" + r + "'");
          matching.pairs.push_back({lit->second, rit->second});
        }
        return matching;
      };

      const ReconstructionResult rec = reconstruct(rig, to_matching(pred_pairs), lp, rp);
      data.report.skipped_triangulations = rec.skipped;

      std::vector<WorldPoint> reference;
      if (gt_cloud_opt->count() > 0) {
        for (const io::CloudRow& row : io::load_cloud(gt_cloud).rows) reference.push_back(row.point);
      } else {
        reference = reconstruct(rig, to_matching(gtc.point_pairs()), lp, rp).points;
      }
      if (!rec.points.empty() && !reference.empty())
        data.report.w2_squared = w2_squared(rec.points, reference);
    }

    data.config_echo = std::string("otmatch ") + kVersion + " evaluate pred=" + pred +
                       " gt=" + gt + " n=" + std::to_string(n) + " m=" + std::to_string(m);
    if (seed_opt->count() > 0) data.seed = seed;
    io::save_metrics(out, data);
    std::cout << "wrote " << out << "\n";
  }
};

// ---------------------------------------------------------------- sweep

struct SweepCommand {
  std::string config, out_dir, sigmas_text, distances_text, matchers_text;
  int n_scenes = 0, n_objects = 0, points_per_object = 0;
  std::uint64_t base_seed = 0;
  double max_rotation_deg = 0.0, beta = 0.0, gamma1 = 0.0, gamma2 = 0.0;
  double radius_min = 0.0, radius_max = 0.0;
  bool plot = false, serial = false;
  CLI::Option* config_opt = nullptr;
  CLI::Option* n_scenes_opt = nullptr;
  CLI::Option* n_objects_opt = nullptr;
  CLI::Option* points_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* rot_opt = nullptr;
  CLI::Option* sigmas_opt = nullptr;
  CLI::Option* distances_opt = nullptr;
  CLI::Option* matchers_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* gamma1_opt = nullptr;
  CLI::Option* gamma2_opt = nullptr;
  CLI::Option* radius_min_opt = nullptr;
  CLI::Option* radius_max_opt = nullptr;

  void attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("sweep", "Run the synthetic spheres benchmark sweep");
    config_opt = cmd->add_option("--config", config, "Sweep config file (JSON)");
    cmd->add_option("--out", out_dir, "Output directory")->required();
    cmd->add_flag("--plot", plot, "Also write an SVG plot of the mismatch curves");
    cmd->add_flag("--serial", serial, "Disable the parallel harness (identical output)");
    n_scenes_opt = cmd->add_option("--n-scenes", n_scenes, "Number of scenes");
    n_objects_opt = cmd->add_option("--n-objects", n_objects, "Spheres per scene");
    points_opt = cmd->add_option("--points-per-object", points_per_object, "Points per sphere");
    seed_opt = cmd->add_option("--base-seed", base_seed, "Base seed for all streams");
    rot_opt = cmd->add_option("--max-rotation-deg", max_rotation_deg, "Camera rotation bound");
    sigmas_opt = cmd->add_option("--sigmas", sigmas_text, "Comma-separated noise levels");
    distances_opt = cmd->add_option("--distances", distances_text, "Comma-separated distances");
    matchers_opt = cmd->add_option("--matchers", matchers_text, "Comma-separated matchers");
    beta_opt = cmd->add_option("--beta", beta, "Depth penalty strength");
    gamma1_opt = cmd->add_option("--gamma1", gamma1, "Lower depth threshold");
    gamma2_opt = cmd->add_option("--gamma2", gamma2, "Upper depth threshold");
    radius_min_opt = cmd->add_option("--radius-min", radius_min, "Smallest sphere radius");
    radius_max_opt = cmd->add_option("--radius-max", radius_max, "Largest sphere radius");
    cmd->callback([this] { run(); });
  }

  void run() const {
    SweepConfig cfg;
    if (config_opt->count() > 0) {
      cfg = io::load_sweep_config(config);
    } else if (const char* env = std::getenv("OTMATCH_CONFIG"); env != nullptr && *env != '\0') {
      cfg = io::load_sweep_config(env);
    }

    if (n_scenes_opt->count()) cfg.n_scenes = n_scenes;
    if (n_objects_opt->count()) cfg.n_objects = n_objects;
    if (points_opt->count()) cfg.points_per_object = points_per_object;
    if (seed_opt->count()) cfg.base_seed = base_seed;
    if (rot_opt->count()) cfg.max_rotation_deg = max_rotation_deg;
    if (radius_min_opt->count()) cfg.radius_min = radius_min;
    if (radius_max_opt->count()) cfg.radius_max = radius_max;
    if (sigmas_opt->count()) {
      cfg.sigmas.clear();
      for (const std::string& part : split_csv(sigmas_text))
        cfg.sigmas.push_back(parse_real_arg(part, "--sigmas"));
    }
    if (distances_opt->count()) {
      cfg.distances.clear();
      for (const std::string& part : split_csv(distances_text)) {
        const auto kind = distance_from_name(part);
        if (!kind) raise(Errc::ValidationError, "--distances: unknown distance '" + part + "'");
        cfg.distances.push_back(*kind);
      }
    }
    if (matchers_opt->count()) {
      cfg.matchers.clear();
      for (const std::string& part : split_csv(matchers_text)) {
        const auto matcher = matcher_from_name(part);
        if (!matcher) raise(Errc::ValidationError, "--matchers: unknown matcher '" + part + "'");
        cfg.matchers.push_back(*matcher);
      }
    }
    if (beta_opt->count()) cfg.reg.beta = beta;
    if (gamma1_opt->count()) cfg.reg.gamma_low = gamma1;
    if (gamma2_opt->count()) cfg.reg.gamma_high = gamma2;
    cfg.validate();

    const SweepResult result = serial ? run_sweep_serial(cfg) : run_sweep(cfg);
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    io::save_sweep_csv((dir / "results.csv").string(), result);
    if (plot) io::save_sweep_svg((dir / "sweep.svg").string(), result);
    std::cout << "wrote " << (dir / "results.csv").string() << " (" << result.rows.size()
              << " rows)" << (plot ? " and sweep.svg" : "") << "\n";
  }
};

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Sparse stereo matching via geometric costs and exact optimal transport"};
  app.set_version_flag("--version", std::string("otmatch ") + kVersion);
  app.require_subcommand(1);

  CostCommand cost;
  MatchCommand match;
  MatchObjectsCommand match_objects;
  TriangulateCommand triangulate;
  EvaluateCommand evaluate;
  SweepCommand sweep;
  cost.attach(app);
  match.attach(app);
  match_objects.attach(app);
  triangulate.attach(app);
  evaluate.attach(app);
  sweep.attach(app);

  try {
    // CLI11 expects argv order reversed for the vector overload.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& err) {
    std::cerr << "error [" << errc_name(err.code()) << "]: " << err.what() << "\n";
    return exit_code_for(err.code());
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace otm::cli
