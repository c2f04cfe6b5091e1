#include "mcsforge/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcsforge/aht.hpp"
#include "mcsforge/mcs_oracle.hpp"
#include "mcsforge/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mcsforge {

namespace {

constexpr const char* kToolVersion = "mcsforge 0.1.0";

std::string fnv1a_hex(const std::string& text) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_manifest(const fs::path& dir, const std::string& command, uint64_t seed,
                    const ExperimentConfig& cfg) {
  const std::string cfg_json = experiment_config_to_json(cfg);
  json m;
  m["command"] = command;
  m["seed"] = seed;
  m["tool"] = kToolVersion;
  m["checkpoint_format_version"] = Checkpoint::kFormatVersion;
  m["config_hash"] = fnv1a_hex(cfg_json);
  m["config"] = json::parse(cfg_json);
  write_text(dir / "manifest.json", m.dump(2));
}

std::string run_generate_seed(const ExperimentConfig& cfg, uint64_t seed,
                              const fs::path& dir) {
  ensure_dir(dir);
  write_manifest(dir, "generate", seed, cfg);
  Trainer trainer(cfg.env, cfg.gen, cfg.K, cfg.tau, seed, cfg.weight_mode(), cfg.alpha);
  std::vector<MetricsRow> metrics;
  trainer.run(&metrics);
  std::ostringstream csv;
  csv << metrics_header(cfg.K) << "\n";
  for (const auto& row : metrics) csv << metrics_row_csv(row) << "\n";
  write_text(dir / "metrics.csv", csv.str());
  write_text(dir / "multipliers.csv", trainer.multipliers().to_csv());
  Checkpoint ck = trainer.population().to_checkpoint();
  ck.meta["env"] = env_id_to_string(cfg.env.id);
  ck.meta["horizon"] = std::to_string(cfg.env.horizon);
  ck.meta["grid_dim"] = std::to_string(cfg.env.grid_dim);
  ck.meta["num_items"] = std::to_string(cfg.env.num_items);
  ck.save((dir / "population.ckpt").string());
  return dir.string();
}

EnvConfig env_from_population_checkpoint(const Checkpoint& cp, const Population& pop) {
  if (cp.meta.count("env")) {
    EnvConfig env = default_env_config(env_id_from_string(cp.meta.at("env")));
    if (cp.meta.count("horizon")) env.horizon = std::stoi(cp.meta.at("horizon"));
    if (cp.meta.count("grid_dim")) env.grid_dim = std::stoi(cp.meta.at("grid_dim"));
    if (cp.meta.count("num_items")) env.num_items = std::stoi(cp.meta.at("num_items"));
    return env;
  }
  const int obs = pop.aht[0].input_dim();
  const int actions = pop.aht[0].output_dim();
  if (obs == 1 && actions == 3) return default_env_config(EnvId::RepeatedMatrix);
  if (actions == 5) return default_env_config(EnvId::CoopReach);
  if (actions == 6) return default_env_config(EnvId::LBF);
  throw ConfigError("cannot infer environment from checkpoint dimensions");
}

}  // namespace

std::string resolve_out_root(const std::string& explicit_dir, const std::string& config_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (!config_dir.empty()) return config_dir;
  if (const char* env = std::getenv("MCSFORGE_OUT"); env && *env) return env;
  return "runs";
}

std::vector<std::string> cmd_generate(const ExperimentConfig& cfg,
                                      const std::string& out_root) {
  const fs::path root = fs::path(out_root) /
                        ("generate_" + env_id_to_string(cfg.env.id) + "_" + cfg.method);
  std::vector<std::string> dirs;
  for (uint64_t seed : cfg.seeds)
    dirs.push_back(run_generate_seed(cfg, seed, root / ("seed_" + std::to_string(seed))));
  return dirs;
}

std::string cmd_rerun(const std::string& manifest_path, const std::string& out_dir) {
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!m.contains("command") || !m.contains("config") || !m.contains("seed"))
    throw ConfigError("manifest is missing command/config/seed");
  const std::string command = m.at("command").get<std::string>();
  const uint64_t seed = m.at("seed").get<uint64_t>();
  ExperimentConfig cfg = parse_experiment_config(m.at("config").dump());
  if (command == "generate")
    return run_generate_seed(cfg, seed, fs::path(out_dir));
  throw ConfigError("manifest command '" + command + "' is not rerunnable");
}

std::string cmd_xp_matrix(const std::string& checkpoint_path, int episodes, uint64_t seed,
                          const std::string& out_root) {
  const Checkpoint cp = Checkpoint::load(checkpoint_path);
  const Population pop = Population::from_checkpoint(cp);
  const EnvConfig env = env_from_population_checkpoint(cp, pop);
  const fs::path dir = fs::path(out_root) / "xp_matrix";
  ensure_dir(dir);
  ReturnMatrix se;
  const ReturnMatrix R = measure_return_matrix(pop, env, episodes, seed, &se);
  write_text(dir / "xp_matrix.csv", R.to_csv());
  write_text(dir / "xp_matrix_stderr.csv", se.to_csv());
  std::vector<std::string> labels;
  for (int k = 0; k < R.K; ++k) labels.push_back("pi_" + std::to_string(k));
  write_text(dir / "xp_matrix.svg", svg_heatmap(R, labels, "cross-play returns"));
  return dir.string();
}

std::string cmd_mcs(const std::string& env_name, int episodes_per_cell,
                    const std::string& out_root) {
  EnvId id;
  try {
    id = env_id_from_string(env_name);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  PolicyUniverse universe;
  switch (id) {
    case EnvId::RepeatedMatrix: universe = PolicyUniverse::matrix_universe(); break;
    case EnvId::CoopReach:
    case EnvId::WeightedCoopReach:
      universe = PolicyUniverse::reaching_corner_universe(id);
      break;
    case EnvId::LBF: universe = PolicyUniverse::lbf_universe(false); break;
  }
  const CoverageReport report = analyze_universe(universe, episodes_per_cell);
  const fs::path dir = fs::path(out_root) / ("mcs_" + env_id_to_string(id));
  ensure_dir(dir);
  write_text(dir / "coverage_report.txt", report.to_text());
  write_text(dir / "coverage_report.csv", report.to_csv());
  write_text(dir / "return_matrix.csv", report.matrix.to_csv());
  write_text(dir / "return_matrix.svg",
             svg_heatmap(report.matrix, universe.names, "oracle return matrix"));
  return dir.string();
}

namespace {

TeammateSet teammates_from_spec(const std::string& spec, const ExperimentConfig& cfg,
                                uint64_t seed) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "heuristics") {
    std::vector<int> ids;
    std::istringstream is(arg);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      try {
        ids.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError("bad heuristic id '" + tok + "' in teammate spec");
      }
    }
    if (ids.empty()) throw ConfigError("teammate spec lists no heuristics");
    return heuristic_teammates(cfg.env.id, ids, seed);
  }
  if (kind == "population") {
    const Population pop = Population::from_checkpoint(Checkpoint::load(arg));
    return population_teammates(pop, seed);
  }
  throw ConfigError("teammate spec must be 'heuristics:<ids>' or 'population:<path>'");
}

}  // namespace

std::vector<std::string> cmd_train_aht(const ExperimentConfig& cfg,
                                       const std::string& teammates_spec,
                                       const std::string& out_root) {
  const fs::path root =
      fs::path(out_root) / ("train_aht_" + env_id_to_string(cfg.env.id));
  std::vector<std::string> dirs;
  for (uint64_t seed : cfg.seeds) {
    const fs::path dir = root / ("seed_" + std::to_string(seed));
    ensure_dir(dir);
    write_manifest(dir, "train-aht", seed, cfg);
    TeammateSet teammates = teammates_from_spec(teammates_spec, cfg, seed + 1000);
    std::vector<AhtMetricsRow> metrics;
    const AhtAgent agent = train_aht(cfg.env, teammates, cfg.aht, seed, &metrics);
    std::ostringstream csv;
    csv << "step,mean_return";
    for (int e = 0; e < cfg.aht.meta_episodes; ++e) csv << ",return_ep" << e;
    csv << ",entropy,loss\n";
    csv.precision(17);
    for (const auto& row : metrics) {
      csv << row.step << "," << row.mean_return;
      for (double r : row.return_by_episode) csv << "," << r;
      csv << "," << row.entropy << "," << row.loss << "\n";
    }
    write_text(dir / "aht_metrics.csv", csv.str());
    agent.to_checkpoint().save((dir / "agent.ckpt").string());
    dirs.push_back(dir.string());
  }
  return dirs;
}

std::string cmd_eval(const ExperimentConfig& cfg, const std::string& agent_path,
                     const std::string& out_root) {
  std::vector<fs::path> agent_files;
  if (fs::is_directory(agent_path)) {
    for (const auto& entry : fs::directory_iterator(agent_path))
      if (entry.is_directory() && fs::exists(entry.path() / "agent.ckpt"))
        agent_files.push_back(entry.path() / "agent.ckpt");
    std::sort(agent_files.begin(), agent_files.end());
  } else {
    agent_files.emplace_back(agent_path);
  }
  if (agent_files.empty()) throw ConfigError("no agent checkpoints under " + agent_path);

  const fs::path dir = fs::path(out_root) / ("eval_" + env_id_to_string(cfg.env.id));
  ensure_dir(dir);

  std::vector<double> overall;
  json per_seed = json::array();
  for (size_t k = 0; k < agent_files.size(); ++k) {
    const AhtAgent agent = AhtAgent::from_checkpoint(Checkpoint::load(agent_files[k].string()));
    const RobustnessReport rep = evaluate_robustness(
        agent, cfg.env, cfg.eval_heuristics, cfg.eval_meta_episodes, cfg.seeds.front());
    write_text(dir / ("robustness_" + std::to_string(k) + ".csv"), rep.to_csv());
    overall.push_back(rep.overall_mean);
    json entry;
    entry["checkpoint"] = agent_files[k].string();
    entry["overall_mean"] = rep.overall_mean;
    per_seed.push_back(entry);
  }
  double mean = 0.0;
  for (double v : overall) mean += v / overall.size();
  const double half = t_confidence_halfwidth(overall);
  json summary;
  summary["teammate_sampling"] = "fixed per meta-episode";
  summary["n_seeds"] = overall.size();
  summary["overall_mean"] = mean;
  summary["ci95_low"] = mean - half;
  summary["ci95_high"] = mean + half;
  summary["per_seed"] = per_seed;
  write_text(dir / "summary.json", summary.dump(2));
  return dir.string();
}

std::string cmd_analyze(const std::string& checkpoint_path, int episodes, uint64_t seed,
                        const std::string& out_root) {
  const Checkpoint cp = Checkpoint::load(checkpoint_path);
  const fs::path dir = fs::path(out_root) / "analyze";
  ensure_dir(dir);
  if (cp.meta.count("kind") && cp.meta.at("kind") == "population") {
    const Population pop = Population::from_checkpoint(cp);
    const EnvConfig env = env_from_population_checkpoint(cp, pop);
    const auto profile = behavior_profile(pop, env, episodes, seed, true);
    std::ostringstream csv;
    csv.precision(17);
    csv << "policy";
    for (size_t c = 0; c < profile.front().size(); ++c) csv << ",bin_" << c;
    csv << "\n";
    for (size_t k = 0; k < profile.size(); ++k) {
      csv << "teammate_" << k;
      for (double v : profile[k]) csv << "," << v;
      csv << "\n";
    }
    write_text(dir / "behavior_profile.csv", csv.str());
    ReturnMatrix se;
    const ReturnMatrix R = measure_return_matrix(pop, env, episodes, seed, &se);
    write_text(dir / "xp_matrix.csv", R.to_csv());
    std::vector<std::string> labels;
    for (int k = 0; k < R.K; ++k) labels.push_back("pi_" + std::to_string(k));
    write_text(dir / "xp_matrix.svg", svg_heatmap(R, labels, "cross-play returns"));
    return dir.string();
  }
  throw ConfigError("analyze expects a population checkpoint");
}

std::string cmd_plot(const std::string& csv_path, const std::string& out_path) {
  const std::string text = read_text(csv_path);
  std::istringstream is(text);
  std::string header;
  if (!std::getline(is, header)) throw IoError("empty CSV " + csv_path);

  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string tok;
    while (std::getline(hs, tok, ',')) cols.push_back(tok);
  }

  if (!cols.empty() && cols.front() == "teammate_0") {
    const ReturnMatrix R = ReturnMatrix::from_csv(text);
    std::vector<std::string> labels;
    for (int k = 0; k < R.K; ++k) labels.push_back("pi_" + std::to_string(k));
    write_text(out_path, svg_heatmap(R, labels, fs::path(csv_path).filename().string()));
    return out_path;
  }
  if (cols.empty() || cols.front() != "step")
    throw ConfigError("cannot plot " + csv_path + ": expected a step-indexed metrics CSV");

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() != cols.size()) throw IoError("ragged CSV row in " + csv_path);
    rows.push_back(std::move(row));
  }
  std::vector<PlotSeries> series;
  for (size_t c = 1; c < cols.size(); ++c) {
    if (cols[c] == "pair_i" || cols[c] == "pair_j") continue;
    PlotSeries s;
    s.label = cols[c];
    for (const auto& row : rows) {
      s.x.push_back(row[0]);
      s.y.push_back(row[c]);
    }
    series.push_back(std::move(s));
  }
  write_text(out_path, svg_line_plot(series, fs::path(csv_path).filename().string(),
                                     "environment steps", "value"));
  return out_path;
}

}  // namespace mcsforge
