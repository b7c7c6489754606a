#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lbsgd/harness.hpp"

namespace lbsgd {

namespace {

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw ConfigError("config: '" + key + "' expects an integer, got '" + value + "'");
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  std::vector<std::uint64_t> seeds;
  if (value.find(',') == std::string::npos) {
    const long long count = to_integer("seeds", value);
    if (count <= 0) throw ConfigError("config: seed count must be positive");
    for (long long s = 0; s < count; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    return seeds;
  }
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const long long s = to_integer("seeds", trim(item));
    if (s < 0) throw ConfigError("config: seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(s));
  }
  return seeds;
}

const std::set<std::string> kBenchmarkKeys = {"d", "r", "episodes", "threshold", "horizon",
                                              "discount"};

}  // namespace

void ExperimentConfig::validate() const {
  solver.validate();
  const auto families = benchmark_families();
  if (std::find(families.begin(), families.end(), benchmark) == families.end())
    throw ConfigError("config: unknown benchmark '" + benchmark + "'");
  if (seeds.empty()) throw ConfigError("config: at least one seed is required");
  const std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw ConfigError("config: seeds must be distinct");
  if (noise.sigma < 0.0 || noise.sigma_hat < 0.0 || noise.b_hat < 0.0)
    throw ConfigError("config: noise levels must be non-negative");
  if (threads < 1) throw ConfigError("config: threads must be at least 1");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty value for '" + key + "'");

    SolverConfig& s = config.solver;
    if (key == "benchmark") config.benchmark = value;
    else if (kBenchmarkKeys.count(key)) config.params[key] = value;
    else if (key == "eta0") s.eta0 = to_double(key, value);
    else if (key == "eta_final") s.eta_final = to_double(key, value);
    else if (key == "omega") s.omega = to_double(key, value);
    else if (key == "steps_per_round") s.steps_per_round = static_cast<int>(to_integer(key, value));
    else if (key == "batch_size") s.batch_size = static_cast<int>(to_integer(key, value));
    else if (key == "delta_hat") s.delta_hat = to_double(key, value);
    else if (key == "trunc_a") s.trunc_a = to_double(key, value);
    else if (key == "mode") s.mode = parse_mode(value);
    else if (key == "oracle") s.oracle_kind = parse_oracle_kind(value);
    else if (key == "nu") s.nu_override = to_double(key, value);
    else if (key == "max_total_queries") s.max_total_queries = to_integer(key, value);
    else if (key == "sigma") config.noise.sigma = to_double(key, value);
    else if (key == "sigma_hat") config.noise.sigma_hat = to_double(key, value);
    else if (key == "b_hat") config.noise.b_hat = to_double(key, value);
    else if (key == "seeds") config.seeds = parse_seeds(value);
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "threads") config.threads = static_cast<int>(to_integer(key, value));
    else
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = parse_config(buffer.str());
  apply_environment(config);
  return config;
}

void apply_environment(ExperimentConfig& config) {
  const char* dir = std::getenv(kOutputDirEnv);
  if (dir != nullptr && *dir != '\0') config.output_dir = dir;
}

ExperimentConfig preset_config(const std::string& family, int d, double sigma) {
  ExperimentConfig config;
  config.benchmark = family;
  config.params["d"] = std::to_string(d);
  config.noise.sigma = sigma;
  config.output_dir = "results/" + family + "_d" + std::to_string(d);
  SolverConfig& s = config.solver;
  if (family == "quadratic_linear") {
    s.omega = 0.7;
    s.steps_per_round = 7;
    s.batch_size = std::max(1, d / 2);
    s.eta0 = 0.05;
    s.eta_final = 5e-4;
    s.mode = Mode::nonconvex;
    s.max_total_queries = 2000;
  } else if (family == "rosenbrock") {
    s.omega = 0.7;
    s.steps_per_round = 5;
    s.batch_size = std::max(1, d - 1);
    s.eta0 = 0.1;
    s.eta_final = 1e-4;
    s.mode = Mode::nonconvex;
    s.max_total_queries = 20000;
  } else if (family == "gaussian_ellipsoid") {
    config.params["r"] = "0.5";
    s.omega = 0.85;
    s.steps_per_round = 3;
    s.batch_size = std::max(1, (d + 1) / 2);
    s.eta0 = 0.1;
    s.eta_final = 1e-4;
    s.mode = Mode::nonconvex;
    s.max_total_queries = 200000;
  } else if (family == "chain_cmdp") {
    config.params.erase("d");
    config.seeds = {0, 1, 2, 3, 4};
    s.oracle_kind = OracleKind::first_order;
    s.omega = 0.7;
    s.steps_per_round = 200;
    s.batch_size = 1;
    s.eta0 = 0.05;
    s.eta_final = 0.05;
    s.mode = Mode::nonconvex;
    s.max_total_queries = 1'000'000;
  } else {
    throw ConfigError("unknown benchmark family '" + family + "'");
  }
  config.validate();
  return config;
}

}  // namespace lbsgd
