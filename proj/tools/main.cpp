#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "occmarkov/io.hpp"
#include "occmarkov/metrics.hpp"
#include "occmarkov/posterior.hpp"
#include "occmarkov/sampler.hpp"
#include "occmarkov/simstudy.hpp"
#include "occmarkov/simulate.hpp"
#include "occmarkov/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace occmarkov;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

// ---- config helpers -------------------------------------------------------

void check_keys(const IniFile& ini, const std::string& section,
                const std::set<std::string>& allowed) {
  auto it = ini.sections.find(section);
  if (it == ini.sections.end()) return;
  for (const auto& [key, value] : it->second)
    if (!allowed.count(key))
      fail(Errc::ParseError,
           "unknown key '" + key + "' in section [" + section + "]");
}

std::string get_string(const IniFile& ini, const std::string& sec,
                       const std::string& key, const std::string& fallback) {
  const std::string* v = ini.find(sec, key);
  return v ? *v : fallback;
}

long get_long(const IniFile& ini, const std::string& sec,
              const std::string& key, long fallback) {
  const std::string* v = ini.find(sec, key);
  return v ? parse_long(*v, 0) : fallback;
}

double get_double(const IniFile& ini, const std::string& sec,
                  const std::string& key, double fallback) {
  const std::string* v = ini.find(sec, key);
  return v ? parse_double(*v, 0) : fallback;
}

bool get_bool(const IniFile& ini, const std::string& sec,
              const std::string& key, bool fallback) {
  const std::string* v = ini.find(sec, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  fail(Errc::ParseError, "key '" + key + "' must be true/false");
}

std::uint64_t get_seed(const IniFile& ini, const std::string& sec,
                       const std::string& key, std::uint64_t fallback) {
  const std::string* v = ini.find(sec, key);
  if (!v) return fallback;
  return static_cast<std::uint64_t>(parse_long(*v, 0));
}

const std::set<std::string> kFitKeys = {
    "chains",      "iterations",  "burn_in",        "thin",
    "sigma_upper", "fix_rho_zero", "adapt_steps",   "parallel_chains",
    "audit_every"};

FitConfig read_fit_section(const IniFile& ini, const std::string& sec,
                           const FitConfig& base) {
  check_keys(ini, sec, kFitKeys);
  FitConfig cfg = base;
  cfg.chains = static_cast<int>(get_long(ini, sec, "chains", cfg.chains));
  cfg.iterations =
      static_cast<int>(get_long(ini, sec, "iterations", cfg.iterations));
  cfg.burn_in = static_cast<int>(get_long(ini, sec, "burn_in", cfg.burn_in));
  cfg.thin = static_cast<int>(get_long(ini, sec, "thin", cfg.thin));
  cfg.sigma_upper = get_double(ini, sec, "sigma_upper", cfg.sigma_upper);
  cfg.fix_rho_zero = get_bool(ini, sec, "fix_rho_zero", cfg.fix_rho_zero);
  cfg.adapt_steps = get_bool(ini, sec, "adapt_steps", cfg.adapt_steps);
  cfg.parallel_chains =
      get_bool(ini, sec, "parallel_chains", cfg.parallel_chains);
  cfg.audit_every =
      static_cast<int>(get_long(ini, sec, "audit_every", cfg.audit_every));
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::IoFailure, "cannot create directory " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_manifest(const std::string& dir, const std::string& command,
                    std::uint64_t seed, const std::vector<std::string>& files,
                    const json& extra) {
  json j;
  j["command"] = command;
  j["seed"] = seed;
  j["files"] = files;
  j["config"] = extra;
  write_text_file(join_path(dir, "manifest.json"), j.dump(2) + "\n");
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& args) {
  IniFile ini = parse_ini(args.config_path);
  check_keys(ini, "scenario",
             {"rows", "cols", "states", "periods", "phi", "transition",
              "error_rate", "sigma1", "sigma2", "rho", "replicates",
              "datasets", "seed"});
  for (const auto& [name, keys] : ini.sections)
    if (name != "scenario" && !name.empty())
      fail(Errc::ParseError, "unknown section [" + name + "]");

  const std::string sec = "scenario";
  int rows = static_cast<int>(get_long(ini, sec, "rows", 10));
  int cols = static_cast<int>(get_long(ini, sec, "cols", 10));
  int S = static_cast<int>(get_long(ini, sec, "states", 3));
  SimulationScenario sc;
  sc.frame = make_grid(rows, cols);
  sc.states = make_state_space(S);
  sc.horizon = static_cast<int>(get_long(ini, sec, "periods", 5));
  if (const std::string* v = ini.find(sec, "phi")) {
    auto values = parse_double_list(*v);
    Vector phi(static_cast<Eigen::Index>(values.size()));
    for (Eigen::Index s = 0; s < phi.size(); ++s)
      phi(s) = values[static_cast<std::size_t>(s)];
    sc.phi = validate_initial_distribution(phi);
  } else {
    sc.phi = validate_initial_distribution(Vector::Constant(S, 1.0 / S));
  }
  if (const std::string* v = ini.find(sec, "transition")) {
    auto values = parse_double_list(*v);
    if (static_cast<int>(values.size()) != S * S)
      fail(Errc::ParseError, "transition list must hold states^2 values");
    Matrix P(S, S);
    for (int j = 0; j < S; ++j)
      for (int k = 0; k < S; ++k)
        P(j, k) = values[static_cast<std::size_t>(j * S + k)];
    sc.transition = validate_transition_matrix(P);
  }
  sc.error_rate = get_double(ini, sec, "error_rate", 0.0);
  sc.bandwidth = validate_bandwidth(get_double(ini, sec, "sigma1", 1.0),
                                    get_double(ini, sec, "sigma2", 1.0),
                                    get_double(ini, sec, "rho", 0.0));
  sc.replicates.constant =
      static_cast<int>(get_long(ini, sec, "replicates", 1));
  sc.seed = args.seed ? *args.seed : get_seed(ini, sec, "seed", 0);
  int datasets = static_cast<int>(get_long(ini, sec, "datasets", 1));
  if (datasets < 1) fail(Errc::InvalidArgument, "datasets must be >= 1");

  ensure_dir(args.out_dir);
  auto sims = run_scenario_batch(sc, datasets);
  std::vector<std::string> files;
  for (const auto& sim : sims) {
    std::string tag = std::to_string(sim.replicate + 1);
    std::string data_name = "dataset_" + tag + ".csv";
    std::string truth_name = "truth_" + tag + ".json";
    write_dataset(join_path(args.out_dir, data_name), sim.observations,
                  sc.frame);
    TruthRecord truth;
    truth.transition = sim.transition();
    truth.phi = sc.phi.phi;
    truth.error_rate = sc.error_rate;
    truth.bandwidth = sc.bandwidth;
    truth.z = sim.panel.z;
    truth.seed = sc.seed;
    truth.replicate_index = sim.replicate;
    write_truth(join_path(args.out_dir, truth_name), truth);
    files.push_back(data_name);
    files.push_back(truth_name);
  }
  json extra;
  extra["datasets"] = datasets;
  extra["error_rate"] = sc.error_rate;
  extra["states"] = S;
  extra["periods"] = sc.horizon;
  extra["grid"] = {rows, cols};
  write_manifest(args.out_dir, "simulate", sc.seed, files, extra);
  std::cout << "wrote " << sims.size() << " dataset(s) to " << args.out_dir
            << "\n";
  return 0;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
  std::string data_path;
  std::string model = "spatial";
  std::string out_dir = ".";
  std::string quadrat;
  int chains = 3;
  int iters = 3000;
  int burnin = 3000;
  int thin = 3;
  std::uint64_t seed = 0;
  double bandwidth_max = 20.0;
  bool fix_rho = false;
  long merge_rare = 0;
  double level = 0.95;
  bool strict = false;
  bool split_rhat = false;
  bool no_parallel = false;
};

int cmd_fit(const FitArgs& args) {
  DatasetParseOptions opts;
  opts.quadrat = args.quadrat;
  opts.merge_threshold = args.merge_rare;
  ParsedDataset data = parse_dataset(args.data_path, opts);
  ensure_dir(args.out_dir);

  if (args.model == "naive") {
    NaiveEstimate est =
        naive_estimate(data.observations, data.frame, data.states);
    std::string out = "# naive point estimate; columns are source states\n";
    for (int j = 0; j < est.transition.S(); ++j) {
      for (int k = 0; k < est.transition.S(); ++k) {
        if (k) out += ',';
        out += format_double(est.transition.p(j, k));
      }
      out += '\n';
    }
    out += "#uniform_columns";
    for (auto flag : est.uniform_columns) {
      out += ',';
      out += flag ? '1' : '0';
    }
    out += '\n';
    write_text_file(join_path(args.out_dir, "naive.csv"), out);
    write_manifest(args.out_dir, "fit", 0, {"naive.csv"},
                   json{{"model", "naive"}});
    std::cout << "wrote " << join_path(args.out_dir, "naive.csv") << "\n";
    return 0;
  }

  FitConfig cfg;
  if (args.model == "spatial") {
    cfg.model = ModelKind::spatial;
  } else if (args.model == "nonspatial") {
    cfg.model = ModelKind::nonspatial;
  } else {
    fail(Errc::InvalidArgument,
         "model must be spatial, nonspatial, or naive");
  }
  cfg.chains = args.chains;
  cfg.iterations = args.iters;
  cfg.burn_in = args.burnin;
  cfg.thin = args.thin;
  cfg.seed = args.seed;
  cfg.sigma_upper = args.bandwidth_max;
  cfg.fix_rho_zero = args.fix_rho;
  cfg.parallel_chains = !args.no_parallel;

  PosteriorDraws draws =
      run_chains(data.observations, data.frame, data.states, cfg);
  SummarizeOptions sopts;
  sopts.level = args.level;
  sopts.split = args.split_rhat;
  SummaryReport report = summarize(draws, data.states, sopts);

  write_draws(join_path(args.out_dir, "draws.csv"), draws);
  write_summary(join_path(args.out_dir, "summary.csv"), report);
  write_rhat_table(join_path(args.out_dir, "rhat.csv"), report);
  write_acceptance(join_path(args.out_dir, "acceptance.csv"), draws);
  json extra;
  extra["model"] = args.model;
  extra["chains"] = cfg.chains;
  extra["iterations"] = cfg.iterations;
  extra["burn_in"] = cfg.burn_in;
  extra["thin"] = cfg.thin;
  extra["sigma_upper"] = cfg.sigma_upper;
  extra["fix_rho_zero"] = cfg.fix_rho_zero;
  extra["states"] = data.states.S;
  extra["sites"] = data.frame.I();
  extra["quadrat"] = data.quadrat;
  write_manifest(args.out_dir, "fit", cfg.seed,
                 {"draws.csv", "summary.csv", "rhat.csv", "acceptance.csv"},
                 extra);
  std::cout << "fit " << args.model << " model: " << report.chains
            << " chains x " << report.draws_per_chain << " draws to "
            << args.out_dir << "\n";
  if (report.any_flagged) {
    std::cout << "warning: R-hat above " << report.options.rhat_threshold
              << " for at least one parameter\n";
    if (args.strict) return kExitNotConverged;
  }
  return 0;
}

// ---- metrics --------------------------------------------------------------

struct MetricsArgs {
  std::string summary_path;
  std::string matrix_path;
  std::string out_path;
};

Matrix matrix_from_summary(const std::string& path) {
  std::string text = read_text_file(path);
  std::map<std::pair<int, int>, double> entries;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.rfind("p_", 0) != 0) continue;
    std::size_t c1 = line.find(',');
    if (c1 == std::string::npos) continue;
    std::string name = line.substr(0, c1);
    std::size_t u1 = name.find('_'), u2 = name.rfind('_');
    if (u1 == u2) continue;
    int j = static_cast<int>(parse_long(name.substr(u1 + 1, u2 - u1 - 1), lineno));
    int k = static_cast<int>(parse_long(name.substr(u2 + 1), lineno));
    std::size_t c2 = line.find(',', c1 + 1);
    if (c2 == std::string::npos) c2 = line.size();
    entries[{j, k}] = parse_double(line.substr(c1 + 1, c2 - c1 - 1), lineno);
  }
  if (entries.empty())
    fail(Errc::ParseError, "no p_j_k rows in " + path);
  int S = 0;
  for (const auto& [jk, v] : entries) S = std::max({S, jk.first, jk.second});
  if (static_cast<int>(entries.size()) != S * S)
    fail(Errc::ParseError, "summary lists an incomplete transition matrix");
  Matrix P(S, S);
  for (const auto& [jk, v] : entries) P(jk.first - 1, jk.second - 1) = v;
  return P;
}

Matrix matrix_from_file(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    rows.push_back(parse_double_list(line, lineno));
  }
  if (rows.empty()) fail(Errc::EmptyData, "no matrix rows in " + path);
  const std::size_t S = rows.size();
  Matrix P(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
  for (std::size_t j = 0; j < S; ++j) {
    if (rows[j].size() != S)
      fail(Errc::ParseError, "matrix row " + std::to_string(j + 1) +
                                 " holds " + std::to_string(rows[j].size()) +
                                 " values, expected " + std::to_string(S));
    for (std::size_t k = 0; k < S; ++k)
      P(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          rows[j][k];
  }
  return P;
}

int cmd_metrics(const MetricsArgs& args) {
  if (args.summary_path.empty() == args.matrix_path.empty())
    fail(Errc::InvalidArgument,
         "provide exactly one of --summary or --matrix");
  Matrix P = args.summary_path.empty() ? matrix_from_file(args.matrix_path)
                                       : matrix_from_summary(args.summary_path);
  TransitionMatrix tp = validate_transition_matrix(P);
  CommunityMetrics cm = community_metrics(tp);
  std::string out = "metric,value\n";
  for (int s = 0; s < cm.w.size(); ++s)
    out += "w_" + std::to_string(s + 1) + "," + format_double(cm.w(s)) + "\n";
  out += "turnover," + format_double(cm.turnover) + "\n";
  out += "damping," + format_double(cm.damping) + "\n";
  if (args.out_path.empty()) {
    std::cout << out;
  } else {
    fs::path parent = fs::path(args.out_path).parent_path();
    if (!parent.empty()) ensure_dir(parent.string());
    write_text_file(args.out_path, out);
  }
  return 0;
}

// ---- diagnose -------------------------------------------------------------

struct DiagnoseArgs {
  std::string draws_path;
  std::string out_dir = ".";
  bool split_rhat = false;
  bool strict = false;
};

int cmd_diagnose(const DiagnoseArgs& args) {
  PosteriorDraws draws = read_draws(args.draws_path);
  StateSpace states = make_state_space(draws.S);
  SummarizeOptions sopts;
  sopts.split = args.split_rhat;
  SummaryReport report = summarize(draws, states, sopts);
  ensure_dir(args.out_dir);
  write_rhat_table(join_path(args.out_dir, "rhat.csv"), report);
  write_acceptance(join_path(args.out_dir, "acceptance.csv"), draws);
  write_traces(join_path(args.out_dir, "trace.csv"), draws);
  write_manifest(args.out_dir, "diagnose", 0,
                 {"rhat.csv", "acceptance.csv", "trace.csv"},
                 json{{"chains", report.chains},
                      {"draws_per_chain", report.draws_per_chain}});
  std::cout << "diagnosed " << report.chains << " chains x "
            << report.draws_per_chain << " draws to " << args.out_dir << "\n";
  if (report.any_flagged) {
    std::cout << "warning: R-hat above " << report.options.rhat_threshold
              << " for at least one parameter\n";
    if (args.strict) return kExitNotConverged;
  }
  return 0;
}

// ---- simstudy -------------------------------------------------------------

struct SimstudyArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

int cmd_simstudy(const SimstudyArgs& args) {
  IniFile ini = parse_ini(args.config_path);
  check_keys(ini, "study",
             {"rows", "cols", "states", "periods", "error_levels",
              "datasets_per_level", "replicates", "phi", "sigma1", "sigma2",
              "rho", "truth_policy", "sigma_exclude", "models", "workers",
              "seed", "out"});
  for (const auto& [name, keys] : ini.sections)
    if (name != "study" && name != "spatial" && name != "nonspatial" &&
        !name.empty())
      fail(Errc::ParseError, "unknown section [" + name + "]");

  const std::string sec = "study";
  StudyConfig cfg;
  cfg.grid_rows = static_cast<int>(get_long(ini, sec, "rows", cfg.grid_rows));
  cfg.grid_cols = static_cast<int>(get_long(ini, sec, "cols", cfg.grid_cols));
  cfg.S = static_cast<int>(get_long(ini, sec, "states", cfg.S));
  cfg.T = static_cast<int>(get_long(ini, sec, "periods", cfg.T));
  if (const std::string* v = ini.find(sec, "error_levels"))
    cfg.error_levels = parse_double_list(*v);
  else
    cfg.error_levels = {0.0, 0.3, 0.6};
  cfg.datasets_per_level = static_cast<int>(
      get_long(ini, sec, "datasets_per_level", cfg.datasets_per_level));
  cfg.replicates =
      static_cast<int>(get_long(ini, sec, "replicates", cfg.replicates));
  if (const std::string* v = ini.find(sec, "phi")) {
    auto values = parse_double_list(*v);
    cfg.phi.resize(static_cast<Eigen::Index>(values.size()));
    for (Eigen::Index s = 0; s < cfg.phi.size(); ++s)
      cfg.phi(s) = values[static_cast<std::size_t>(s)];
  }
  cfg.truth_bandwidth =
      validate_bandwidth(get_double(ini, sec, "sigma1", 1.0),
                         get_double(ini, sec, "sigma2", 1.0),
                         get_double(ini, sec, "rho", 0.0));
  std::string policy = get_string(ini, sec, "truth_policy", "study");
  if (policy == "study")
    cfg.truth_policy = TruthPolicy::study;
  else if (policy == "per_level")
    cfg.truth_policy = TruthPolicy::per_level;
  else if (policy == "per_dataset")
    cfg.truth_policy = TruthPolicy::per_dataset;
  else
    fail(Errc::ParseError,
         "truth_policy must be study, per_level, or per_dataset");
  cfg.sigma_exclude = get_double(ini, sec, "sigma_exclude", cfg.sigma_exclude);
  std::string models = get_string(ini, sec, "models", "naive,nonspatial,spatial");
  {
    cfg.run_naive = cfg.run_nonspatial = cfg.run_spatial = false;
    std::size_t start = 0;
    while (start <= models.size()) {
      std::size_t comma = models.find(',', start);
      std::string token = models.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start);
      while (!token.empty() && token.front() == ' ') token.erase(0, 1);
      while (!token.empty() && token.back() == ' ') token.pop_back();
      if (token == "naive")
        cfg.run_naive = true;
      else if (token == "nonspatial")
        cfg.run_nonspatial = true;
      else if (token == "spatial")
        cfg.run_spatial = true;
      else if (!token.empty())
        fail(Errc::ParseError, "unknown model '" + token + "'");
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  cfg.workers = args.workers
                    ? *args.workers
                    : static_cast<int>(get_long(ini, sec, "workers", 1));
  cfg.seed = args.seed ? *args.seed : get_seed(ini, sec, "seed", 0);

  FitConfig base;
  base.model = ModelKind::nonspatial;
  cfg.nonspatial_fit = read_fit_section(ini, "nonspatial", base);
  base.model = ModelKind::spatial;
  cfg.spatial_fit = read_fit_section(ini, "spatial", base);

  std::string out_dir =
      !args.out_dir.empty() ? args.out_dir : get_string(ini, sec, "out", ".");
  ensure_dir(out_dir);

  StudyResult result = run_study(cfg);
  write_text_file(join_path(out_dir, "results.csv"),
                  format_study_results(result, cfg));
  write_text_file(join_path(out_dir, "fits.csv"),
                  format_study_fits(result, cfg));
  write_text_file(join_path(out_dir, "exclusions.csv"),
                  format_study_exclusions(result, cfg));
  write_text_file(join_path(out_dir, "truths.csv"),
                  format_study_truths(result, cfg));
  json extra;
  extra["levels"] = cfg.error_levels;
  extra["datasets_per_level"] = cfg.datasets_per_level;
  extra["grid"] = {cfg.grid_rows, cfg.grid_cols};
  extra["states"] = cfg.S;
  extra["periods"] = cfg.T;
  extra["workers"] = cfg.workers;
  write_manifest(out_dir, "simstudy", cfg.seed,
                 {"results.csv", "fits.csv", "exclusions.csv", "truths.csv"},
                 extra);
  std::cout << "study complete: " << result.fits.size() << " fits to "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial multistate dynamic site occupancy model"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Generate datasets from a scenario");
  sim->add_option("--config", sim_args.config_path, "Scenario config file")
      ->required();
  sim->add_option("--out", sim_args.out_dir, "Output directory");
  std::uint64_t sim_seed = 0;
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Master seed override");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a model to a dataset");
  fit->add_option("--data", fit_args.data_path, "Dataset CSV")->required();
  fit->add_option("--model", fit_args.model,
                  "spatial, nonspatial, or naive");
  fit->add_option("--out", fit_args.out_dir, "Output directory");
  fit->add_option("--quadrat", fit_args.quadrat, "Quadrat to select");
  fit->add_option("--chains", fit_args.chains, "Number of chains");
  fit->add_option("--iters", fit_args.iters,
                  "Post-burn-in sweeps before thinning");
  fit->add_option("--burnin", fit_args.burnin, "Burn-in sweeps");
  fit->add_option("--thin", fit_args.thin, "Thinning interval");
  fit->add_option("--seed", fit_args.seed, "Master seed");
  fit->add_option("--bandwidth-max", fit_args.bandwidth_max,
                  "Upper bound U of the uniform sigma prior");
  fit->add_flag("--fix-rho", fit_args.fix_rho, "Fix rho at zero");
  fit->add_option("--merge-rare", fit_args.merge_rare,
                  "Merge states with fewer total records into 'other'");
  fit->add_option("--level", fit_args.level, "Credible-interval level");
  fit->add_flag("--strict", fit_args.strict,
                "Exit 3 when any R-hat exceeds the threshold");
  fit->add_flag("--split-rhat", fit_args.split_rhat, "Use split-halves R-hat");
  fit->add_flag("--no-parallel", fit_args.no_parallel,
                "Run chains sequentially");

  MetricsArgs met_args;
  auto* met = app.add_subcommand("metrics", "Community metrics from a matrix");
  met->add_option("--summary", met_args.summary_path,
                  "summary.csv from a fit");
  met->add_option("--matrix", met_args.matrix_path,
                  "Plain CSV matrix, one row per line");
  met->add_option("--out", met_args.out_path, "Output file (default stdout)");

  DiagnoseArgs diag_args;
  auto* diag = app.add_subcommand("diagnose", "Convergence diagnostics");
  diag->add_option("--draws", diag_args.draws_path, "draws.csv from a fit")
      ->required();
  diag->add_option("--out", diag_args.out_dir, "Output directory");
  diag->add_flag("--split-rhat", diag_args.split_rhat,
                 "Use split-halves R-hat");
  diag->add_flag("--strict", diag_args.strict,
                 "Exit 3 when any R-hat exceeds the threshold");

  SimstudyArgs study_args;
  auto* study = app.add_subcommand("simstudy", "Run a simulation study");
  study->add_option("--config", study_args.config_path, "Study config file")
      ->required();
  study->add_option("--out", study_args.out_dir, "Output directory override");
  std::uint64_t study_seed = 0;
  auto* study_seed_opt =
      study->add_option("--seed", study_seed, "Master seed override");
  int study_workers = 0;
  auto* study_workers_opt =
      study->add_option("--workers", study_workers, "Worker pool size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (sim->parsed()) {
      if (sim_seed_opt->count()) sim_args.seed = sim_seed;
      return cmd_simulate(sim_args);
    }
    if (fit->parsed()) return cmd_fit(fit_args);
    if (met->parsed()) return cmd_metrics(met_args);
    if (diag->parsed()) return cmd_diagnose(diag_args);
    if (study->parsed()) {
      if (study_seed_opt->count()) study_args.seed = study_seed;
      if (study_workers_opt->count()) study_args.workers = study_workers;
      return cmd_simstudy(study_args);
    }
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return errc_is_validation(e.code()) ? kExitValidation : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
