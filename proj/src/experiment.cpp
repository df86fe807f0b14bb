#include "mvub/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mvub {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
}

double get_number(const json& obj, const std::string& key, double fallback,
                  const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ConfigError(where + "." + key + ": expected an integer");
  return obj[key].get<int>();
}

std::vector<double> read_column_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read data file " + path.string());
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (values.empty()) throw ConfigError("data file " + path.string() + " holds no numbers");
  return values;
}

struct ModelSpec {
  Model model;
  double default_bandwidth;
};

ModelSpec parse_model(const json& node, const std::filesystem::path& base_dir) {
  check_keys(node, {"name", "params"}, "model");
  if (!node.contains("name") || !node["name"].is_string())
    throw ConfigError("model.name: expected a string");
  const std::string name = node["name"].get<std::string>();
  const json params = node.value("params", json::object());

  try {
    if (name == "curie_weiss") {
      check_keys(params, {"beta", "k", "sigma", "x0"}, "model.params");
      return {curie_weiss(get_number(params, "beta", 1.0, "model.params"),
                          get_number(params, "k", 0.25, "model.params"),
                          get_number(params, "sigma", 1.0, "model.params"),
                          get_number(params, "x0", 1.0, "model.params")),
              0.1};
    }
    if (name == "mean_field_ou") {
      check_keys(params, {"theta", "kappa", "sigma", "x0"}, "model.params");
      return {mean_field_ou(get_number(params, "theta", 1.0, "model.params"),
                            get_number(params, "kappa", 0.5, "model.params"),
                            get_number(params, "sigma", 1.0, "model.params"),
                            get_number(params, "x0", 1.0, "model.params")),
              0.1};
    }
    if (name == "mle_gaussian") {
      check_keys(params, {"y", "y_file"}, "model.params");
      std::vector<double> y;
      if (params.contains("y")) {
        if (!params["y"].is_array()) throw ConfigError("model.params.y: expected an array");
        for (const auto& v : params["y"]) {
          if (!v.is_number()) throw ConfigError("model.params.y: expected numbers");
          y.push_back(v.get<double>());
        }
      } else if (params.contains("y_file")) {
        y = read_column_file(base_dir / params["y_file"].get<std::string>());
      } else {
        throw ConfigError("mle_gaussian requires model.params.y or model.params.y_file");
      }
      return {mle_gaussian(std::move(y)), 0.1};
    }
    if (name == "neuron3d") {
      check_keys(params,
                 {"V0", "sigma_V0", "a", "b", "c", "I", "b_ext", "w0", "sigma_w0", "V_rev",
                  "a_r", "a_d", "T_max", "lambda", "y0", "sigma_y0", "J", "b_J", "V_T",
                  "Gamma", "Lambda"},
                 "model.params");
      NeuronParams p;
      p.V0 = get_number(params, "V0", p.V0, "model.params");
      p.sigma_V0 = get_number(params, "sigma_V0", p.sigma_V0, "model.params");
      p.a = get_number(params, "a", p.a, "model.params");
      p.b = get_number(params, "b", p.b, "model.params");
      p.c = get_number(params, "c", p.c, "model.params");
      p.I = get_number(params, "I", p.I, "model.params");
      p.b_ext = get_number(params, "b_ext", p.b_ext, "model.params");
      p.w0 = get_number(params, "w0", p.w0, "model.params");
      p.sigma_w0 = get_number(params, "sigma_w0", p.sigma_w0, "model.params");
      p.V_rev = get_number(params, "V_rev", p.V_rev, "model.params");
      p.a_r = get_number(params, "a_r", p.a_r, "model.params");
      p.a_d = get_number(params, "a_d", p.a_d, "model.params");
      p.T_max = get_number(params, "T_max", p.T_max, "model.params");
      p.lambda = get_number(params, "lambda", p.lambda, "model.params");
      p.y0 = get_number(params, "y0", p.y0, "model.params");
      p.sigma_y0 = get_number(params, "sigma_y0", p.sigma_y0, "model.params");
      p.J = get_number(params, "J", p.J, "model.params");
      p.b_J = get_number(params, "b_J", p.b_J, "model.params");
      p.V_T = get_number(params, "V_T", p.V_T, "model.params");
      p.Gamma = get_number(params, "Gamma", p.Gamma, "model.params");
      p.Lambda = get_number(params, "Lambda", p.Lambda, "model.params");
      return {neuron3d(p), 0.05};
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("unknown model \"" + name + "\"");
}

EstimatorConfig parse_estimator(const json& node) {
  check_keys(node, {"l_star", "l_max", "p_max", "n_base", "pmf_weights"}, "estimator");
  EstimatorConfig cfg;
  cfg.l_star = get_int(node, "l_star", cfg.l_star, "estimator");
  cfg.l_max = get_int(node, "l_max", cfg.l_max, "estimator");
  cfg.p_max = get_int(node, "p_max", cfg.p_max, "estimator");
  cfg.n_base = get_int(node, "n_base", cfg.n_base, "estimator");
  if (node.contains("pmf_weights")) {
    const std::string w = node["pmf_weights"].get<std::string>();
    if (w == "natural_log")
      cfg.pmf_weights = PmfWeights::NaturalLog;
    else if (w == "log2_squared")
      cfg.pmf_weights = PmfWeights::Log2Squared;
    else
      throw ConfigError("estimator.pmf_weights: expected natural_log or log2_squared");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::filesystem::path out_path(const ExperimentConfig& config, const std::string& file) {
  return std::filesystem::path(config.out) / file;
}

std::ofstream open_output(const ExperimentConfig& config, const std::string& file) {
  std::filesystem::create_directories(config.out);
  std::ofstream out(out_path(config, file), std::ios::binary);  // LF endings everywhere
  if (!out) throw ConfigError("cannot write output file " + out_path(config, file).string());
  return out;
}

Phi make_phi_checked(const ExperimentConfig& config) {
  if (config.phi.component < 1 || config.phi.component > config.model.dim)
    throw ConfigError("phi.component out of range for model dimension " +
                      std::to_string(config.model.dim));
  if (config.phi.power < 1) throw ConfigError("phi.power must be >= 1");
  return config.phi.make(config.model.dim);
}

double wall_seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void mode_run(const ExperimentConfig& config) {
  const Phi phi = make_phi_checked(config);
  const auto start = std::chrono::steady_clock::now();
  const auto replicates =
      run_replicates(config.model, config.estimator, config.m, config.seed, config.threads);
  const auto result = summarize(replicates, phi);
  const double seconds = wall_seconds_since(start);

  {
    auto csv = open_output(config, "replicates.csv");
    csv << "id,level,horizon,value,cost_units\n";
    for (std::size_t i = 0; i < replicates.size(); ++i)
      csv << i << ',' << replicates[i].level << ',' << replicates[i].horizon << ','
          << format_float(result.values[i]) << ','
          << format_float(replicates[i].cost_units) << '\n';
  }
  {
    json summary{{"estimate", result.mean},
                 {"std_error", result.std_error},
                 {"M", config.m},
                 {"total_cost_units", result.total_cost_units},
                 {"wall_seconds", seconds}};
    auto out = open_output(config, "summary.json");
    out << summary.dump(2) << '\n';
  }
}

void mode_mse(const ExperimentConfig& config) {
  if (!config.truth)
    throw ConfigError("mse mode requires a \"truth\" value for the target functional");
  const Phi phi = make_phi_checked(config);
  std::vector<int> m_values = config.m_values;
  if (m_values.empty()) m_values.push_back(config.m);

  auto csv = open_output(config, "mse.csv");
  auto runs_csv = open_output(config, "mse_runs.csv");
  csv << "m,mse,seconds\n";
  runs_csv << "m,run,estimate\n";

  std::uint64_t id_offset = 0;
  for (int m : m_values) {
    if (m < 1) throw ConfigError("mse m_values must be positive");
    const auto start = std::chrono::steady_clock::now();
    const auto study = mse_study(config.model, config.estimator, phi, *config.truth, m,
                                 config.runs, config.seed, config.threads, id_offset);
    const double seconds = wall_seconds_since(start);
    csv << m << ',' << format_float(study.mse) << ',' << format_float(seconds) << '\n';
    for (int run = 0; run < config.runs; ++run)
      runs_csv << m << ',' << run << ',' << format_float(study.estimates[run]) << '\n';
    id_offset += static_cast<std::uint64_t>(m) * config.runs;
  }
}

void mode_kde(const ExperimentConfig& config) {
  const auto replicates =
      run_replicates(config.model, config.estimator, config.m, config.seed, config.threads);
  const auto pooled = pooled_measure(replicates);
  const double h = config.kde.bandwidth.value_or(config.default_bandwidth);
  if (!(h > 0.0)) throw ConfigError("kde.bandwidth must be positive");
  if (config.kde.grid_points < 2) throw ConfigError("kde.grid_points must be >= 2");

  std::vector<int> components = config.kde.components;
  if (components.empty())
    for (int c = 1; c <= config.model.dim; ++c) components.push_back(c);

  json summary{{"bandwidth", h},
               {"total_weight", pooled.total_mass()},
               {"components", json::array()}};

  for (int component : components) {
    if (component < 1 || component > config.model.dim)
      throw ConfigError("kde.components entry out of range");
    const int c = component - 1;

    double amin = pooled.point(0)[c], amax = amin;
    for (std::size_t j = 1; j < pooled.size(); ++j) {
      amin = std::min(amin, pooled.point(j)[c]);
      amax = std::max(amax, pooled.point(j)[c]);
    }
    const double lo = config.kde.grid_min.value_or(amin - 4.0 * h);
    const double hi = config.kde.grid_max.value_or(amax + 4.0 * h);
    if (!(hi > lo)) throw ConfigError("kde grid range is empty");

    std::vector<double> grid(config.kde.grid_points);
    const double step = (hi - lo) / (config.kde.grid_points - 1);
    for (int g = 0; g < config.kde.grid_points; ++g) grid[g] = lo + step * g;

    const auto density = kde(pooled, c, h, grid);
    auto csv = open_output(config, "kde_component_" + std::to_string(component) + ".csv");
    csv << "x,density\n";
    for (std::size_t g = 0; g < grid.size(); ++g)
      csv << format_float(density.grid[g]) << ',' << format_float(density.values[g]) << '\n';

    // full-measure mass, regardless of the display window
    const double mass = adaptive_simpson(
        [&](double x) { return kde_value(pooled, c, h, x); }, amin - 8.0 * h, amax + 8.0 * h,
        1e-9);
    summary["components"].push_back(
        {{"component", component}, {"quadrature_mass", mass}, {"grid_min", lo}, {"grid_max", hi}});
  }

  auto out = open_output(config, "kde_summary.json");
  out << summary.dump(2) << '\n';
}

void mode_diagnose(const ExperimentConfig& config) {
  const auto trace =
      contraction_diagnostic(config.model, config.diagnose.level, config.diagnose.particles,
                             config.diagnose.t_max, config.diagnose.x0_a, config.diagnose.x0_b,
                             config.seed);
  auto csv = open_output(config, "diagnostic.csv");
  csv << "t,w2\n";
  for (const auto& [t, w2] : trace) csv << t << ',' << format_float(w2) << '\n';
}

void mode_cost(const ExperimentConfig& config) {
  const auto levels = pmf_level(config.estimator);
  const auto horizons = pmf_horizon(config.estimator);
  auto csv = open_output(config, "cost.csv");
  csv << "level,horizon,prob_level,prob_horizon,blocks,cost_units\n";
  std::printf("%5s %7s %12s %12s %7s %16s\n", "level", "horizon", "prob_level",
              "prob_horizon", "blocks", "cost_units");
  for (const auto& [l, pl] : levels)
    for (const auto& [p, pp] : horizons) {
      const double cost = replicate_cost_units(config.estimator, l, p);
      csv << l << ',' << p << ',' << format_float(pl) << ',' << format_float(pp) << ','
          << (1 << p) << ',' << format_float(cost) << '\n';
      std::printf("%5d %7d %12.6f %12.6f %7d %16.1f\n", l, p, pl, pp, 1 << p, cost);
    }
  std::printf("expected cost: %s units per replicate\n",
              format_float(expected_cost(config.estimator)).c_str());
}

}  // namespace

Phi PhiSpec::make(int) const {
  const int c = component - 1;
  const int k = power;
  return [c, k](std::span<const double> x) {
    double p = x[c];
    for (int i = 1; i < k; ++i) p *= x[c];
    return p;
  };
}

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root,
             {"mode", "model", "estimator", "phi", "m", "runs", "m_values", "truth", "seed",
              "threads", "out", "kde", "diagnose"},
             "config");

  ExperimentConfig config;
  if (root.contains("mode")) {
    config.mode = root["mode"].get<std::string>();
    static const std::set<std::string> modes{"run", "mse", "kde", "diagnose", "cost"};
    if (!modes.count(config.mode)) throw ConfigError("unknown mode \"" + config.mode + "\"");
  }

  if (!root.contains("model")) throw ConfigError("config requires a model");
  auto parsed = parse_model(root["model"], base_dir);
  config.model = std::move(parsed.model);
  config.default_bandwidth = parsed.default_bandwidth;
  config.model_name = root["model"]["name"].get<std::string>();

  if (root.contains("estimator")) config.estimator = parse_estimator(root["estimator"]);

  if (root.contains("phi")) {
    check_keys(root["phi"], {"component", "power"}, "phi");
    config.phi.component = get_int(root["phi"], "component", 1, "phi");
    config.phi.power = get_int(root["phi"], "power", 1, "phi");
  }

  config.m = get_int(root, "m", config.m, "config");
  if (config.m < 1) throw ConfigError("m must be >= 1");
  config.runs = get_int(root, "runs", config.runs, "config");
  if (root.contains("m_values")) {
    if (!root["m_values"].is_array()) throw ConfigError("m_values: expected an array");
    for (const auto& v : root["m_values"]) {
      if (!v.is_number_integer()) throw ConfigError("m_values: expected integers");
      config.m_values.push_back(v.get<int>());
    }
  }
  if (root.contains("truth")) {
    if (!root["truth"].is_number()) throw ConfigError("truth: expected a number");
    config.truth = root["truth"].get<double>();
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer()) throw ConfigError("seed: expected an integer");
    config.seed = root["seed"].get<std::uint64_t>();
  }
  config.threads = get_int(root, "threads", 0, "config");
  if (root.contains("out")) config.out = root["out"].get<std::string>();

  if (root.contains("kde")) {
    const json& node = root["kde"];
    check_keys(node, {"bandwidth", "grid_min", "grid_max", "grid_points", "components"},
               "kde");
    if (node.contains("bandwidth")) config.kde.bandwidth = node["bandwidth"].get<double>();
    if (node.contains("grid_min")) config.kde.grid_min = node["grid_min"].get<double>();
    if (node.contains("grid_max")) config.kde.grid_max = node["grid_max"].get<double>();
    config.kde.grid_points = get_int(node, "grid_points", config.kde.grid_points, "kde");
    if (node.contains("components")) {
      if (!node["components"].is_array()) throw ConfigError("kde.components: expected an array");
      for (const auto& v : node["components"]) config.kde.components.push_back(v.get<int>());
    }
  }
  if (root.contains("diagnose")) {
    const json& node = root["diagnose"];
    check_keys(node, {"level", "particles", "t_max", "x0_a", "x0_b"}, "diagnose");
    config.diagnose.level = get_int(node, "level", config.diagnose.level, "diagnose");
    config.diagnose.particles =
        get_int(node, "particles", config.diagnose.particles, "diagnose");
    config.diagnose.t_max = get_int(node, "t_max", config.diagnose.t_max, "diagnose");
    config.diagnose.x0_a = get_number(node, "x0_a", config.diagnose.x0_a, "diagnose");
    config.diagnose.x0_b = get_number(node, "x0_b", config.diagnose.x0_b, "diagnose");
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

void run_experiment(const ExperimentConfig& config) {
  if (config.mode == "run")
    mode_run(config);
  else if (config.mode == "mse")
    mode_mse(config);
  else if (config.mode == "kde")
    mode_kde(config);
  else if (config.mode == "diagnose")
    mode_diagnose(config);
  else if (config.mode == "cost")
    mode_cost(config);
  else
    throw ConfigError("no mode selected");
}

}  // namespace mvub
