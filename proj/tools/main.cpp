// Command-line pipeline: extract directions from movement pairs, simulate
// scenario data, fit the spatial mixture by MCMC, score withheld data by
// posterior predictive probability, rank candidate fits, and summarize chains.
//
// Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "simplexdrift/diagnostics.hpp"
#include "simplexdrift/em_init.hpp"
#include "simplexdrift/errors.hpp"
#include "simplexdrift/io.hpp"
#include "simplexdrift/selection.hpp"

namespace sd = simplexdrift;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// arc-length column stamped onto simulated direction files; simulated
// observations carry no geodesic distance, only the direction
constexpr double kSimulatedTheta2 = 0.78539816339744831;  // pi/4

struct CommonOpts {
  std::string config_path;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
};

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw sd::ValidationError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) {
      throw sd::ValidationError(where + "." + item.key() + ": unknown key");
    }
  }
}

json load_config(const std::string& path) {
  if (path.empty()) throw sd::ValidationError("--config is required for this command");
  std::ifstream in(path);
  if (!in) throw sd::ValidationError("cannot open config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw sd::ValidationError(path + ": malformed JSON");
  check_keys(j, "config",
             {"model", "sampler", "init", "scenario", "files", "predict", "selection",
              "diagnose"});
  return j;
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw sd::ValidationError(where + ": expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw sd::ValidationError(where + ": expected an integer");
  return j.get<int>();
}

sd::Vec get_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw sd::ValidationError(where + ": expected an array of numbers");
  sd::Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = get_number(j[i], where);
  return v;
}

sd::Mat get_mat(const json& j, const std::string& where) {
  if (!j.is_array()) throw sd::ValidationError(where + ": expected an array of rows");
  if (j.empty()) return sd::Mat(0, 0);
  if (!j[0].is_array()) throw sd::ValidationError(where + ": expected an array of rows");
  const size_t cols = j[0].size();
  sd::Mat m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw sd::ValidationError(where + ": ragged rows");
    for (size_t c = 0; c < cols; ++c) m(r, c) = get_number(j[r][c], where);
  }
  return m;
}

sd::KernelConfig kernel_from_config(const json& j, const std::string& where) {
  check_keys(j, where, {"family", "sigma", "omega", "nu", "amplitude"});
  sd::KernelConfig k;
  if (j.contains("family")) {
    const std::string f = j.at("family").get<std::string>();
    if (f == "squared_exponential") {
      k.family = sd::KernelFamily::squared_exponential;
    } else if (f == "matern") {
      k.family = sd::KernelFamily::matern;
    } else {
      throw sd::ValidationError(where + ".family: unknown kernel family '" + f + "'");
    }
  }
  if (j.contains("sigma")) k.sigma = get_number(j.at("sigma"), where + ".sigma");
  if (j.contains("omega")) k.omega = get_number(j.at("omega"), where + ".omega");
  if (j.contains("nu")) k.nu = get_number(j.at("nu"), where + ".nu");
  if (j.contains("amplitude")) k.amplitude = get_number(j.at("amplitude"), where + ".amplitude");
  return k;
}

sd::ModelSpec model_from_config(const json& config) {
  if (!config.contains("model")) throw sd::ValidationError("config.model: missing section");
  const json& j = config.at("model");
  check_keys(j, "config.model",
             {"K", "D", "kernel", "component_kernels", "gp_means", "varsigma", "tau", "lambda"});
  sd::ModelSpec spec;
  if (!j.contains("K") || !j.contains("D")) {
    throw sd::ValidationError("config.model: K and D are required");
  }
  spec.K = get_int(j.at("K"), "config.model.K");
  spec.D = get_int(j.at("D"), "config.model.D");
  if (j.contains("kernel")) spec.kernel = kernel_from_config(j.at("kernel"), "config.model.kernel");
  if (j.contains("component_kernels")) {
    const json& arr = j.at("component_kernels");
    if (!arr.is_array()) {
      throw sd::ValidationError("config.model.component_kernels: expected an array");
    }
    for (size_t i = 0; i < arr.size(); ++i) {
      spec.component_kernels.push_back(
          kernel_from_config(arr[i], "config.model.component_kernels[" + std::to_string(i) + "]"));
    }
  }
  spec.gp_means = j.contains("gp_means") ? get_mat(j.at("gp_means"), "config.model.gp_means")
                                         : sd::Mat::Zero(spec.K, spec.D);
  if (j.contains("varsigma")) spec.varsigma = get_number(j.at("varsigma"), "config.model.varsigma");
  if (j.contains("tau")) spec.tau = get_number(j.at("tau"), "config.model.tau");
  spec.lambda = j.contains("lambda")
                    ? get_vec(j.at("lambda"), "config.model.lambda")
                    : sd::Vec::Constant(spec.K, 1.0 / spec.K);
  try {
    spec.validate();
  } catch (const sd::ValidationError& err) {
    throw sd::ValidationError(std::string("config.model: ") + err.what());
  }
  return spec;
}

struct SamplerOptions {
  sd::SamplerConfig config;
  bool tune = true;
  double target_accept = 0.75;
};

SamplerOptions sampler_from_config(const json& config) {
  SamplerOptions out;
  if (!config.contains("sampler")) return out;
  const json& j = config.at("sampler");
  check_keys(j, "config.sampler",
             {"iterations", "burn_in", "thin", "hmc_step_size", "hmc_leapfrog_steps", "chains",
              "seed", "tune", "target_accept"});
  if (j.contains("iterations")) out.config.iterations = get_int(j.at("iterations"), "config.sampler.iterations");
  if (j.contains("burn_in")) out.config.burn_in = get_int(j.at("burn_in"), "config.sampler.burn_in");
  if (j.contains("thin")) out.config.thin = get_int(j.at("thin"), "config.sampler.thin");
  if (j.contains("hmc_step_size")) {
    out.config.hmc_step_size = get_number(j.at("hmc_step_size"), "config.sampler.hmc_step_size");
  }
  if (j.contains("hmc_leapfrog_steps")) {
    out.config.hmc_leapfrog_steps = get_int(j.at("hmc_leapfrog_steps"), "config.sampler.hmc_leapfrog_steps");
  }
  if (j.contains("chains")) out.config.chains = get_int(j.at("chains"), "config.sampler.chains");
  if (j.contains("seed")) out.config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("tune")) {
    if (!j.at("tune").is_boolean()) throw sd::ValidationError("config.sampler.tune: expected a boolean");
    out.tune = j.at("tune").get<bool>();
  }
  if (j.contains("target_accept")) {
    out.target_accept = get_number(j.at("target_accept"), "config.sampler.target_accept");
  }
  return out;
}

sd::EmConfig em_from_config(const json& config, std::uint64_t fallback_seed) {
  sd::EmConfig em;
  em.seed = fallback_seed;
  if (!config.contains("init")) return em;
  const json& j = config.at("init");
  check_keys(j, "config.init", {"restarts", "max_iters", "tol", "seed"});
  if (j.contains("restarts")) em.restarts = get_int(j.at("restarts"), "config.init.restarts");
  if (j.contains("max_iters")) em.max_iters = get_int(j.at("max_iters"), "config.init.max_iters");
  if (j.contains("tol")) em.tol = get_number(j.at("tol"), "config.init.tol");
  if (j.contains("seed")) em.seed = j.at("seed").get<std::uint64_t>();
  return em;
}

sd::ScenarioConfig scenario_from_config(const json& config) {
  if (!config.contains("scenario")) throw sd::ValidationError("config.scenario: missing section");
  const json& j = config.at("scenario");
  check_keys(j, "config.scenario",
             {"name", "D", "n_train", "n_test", "seed", "kernel", "gp_means", "nu", "varsigma",
              "mixing", "component_means", "concentrations"});
  if (!j.contains("name")) throw sd::ValidationError("config.scenario.name: required");
  sd::Scenario scenario;
  try {
    scenario = sd::parse_scenario(j.at("name").get<std::string>());
  } catch (const sd::ValidationError& err) {
    throw sd::ValidationError(std::string("config.scenario.name: ") + err.what());
  }
  const int D = j.contains("D") ? get_int(j.at("D"), "config.scenario.D") : 2;
  sd::ScenarioConfig sc = sd::default_scenario(scenario, D);
  if (j.contains("n_train")) sc.n_train = get_int(j.at("n_train"), "config.scenario.n_train");
  if (j.contains("n_test")) sc.n_test = get_int(j.at("n_test"), "config.scenario.n_test");
  if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("kernel")) sc.kernel = kernel_from_config(j.at("kernel"), "config.scenario.kernel");
  if (j.contains("gp_means")) sc.gp_means = get_mat(j.at("gp_means"), "config.scenario.gp_means");
  if (j.contains("nu")) sc.nu = get_vec(j.at("nu"), "config.scenario.nu");
  if (j.contains("varsigma")) sc.varsigma = get_number(j.at("varsigma"), "config.scenario.varsigma");
  if (j.contains("mixing")) sc.mixing = get_vec(j.at("mixing"), "config.scenario.mixing");
  if (j.contains("concentrations")) {
    sc.concentrations = get_vec(j.at("concentrations"), "config.scenario.concentrations");
  }
  if (j.contains("component_means")) {
    const json& arr = j.at("component_means");
    if (!arr.is_array()) {
      throw sd::ValidationError("config.scenario.component_means: expected an array");
    }
    sc.component_means.clear();
    for (const json& m : arr) {
      sc.component_means.push_back(get_vec(m, "config.scenario.component_means"));
    }
  }
  try {
    sc.validate();
  } catch (const sd::ValidationError& err) {
    throw sd::ValidationError(std::string("config.scenario: ") + err.what());
  }
  return sc;
}

std::string file_path(const json& config, const std::string& key, bool required) {
  if (config.contains("files")) {
    const json& files = config.at("files");
    check_keys(files, "config.files", {"input", "train", "held", "truth", "chain"});
    if (files.contains(key)) {
      if (!files.at(key).is_string()) {
        throw sd::ValidationError("config.files." + key + ": expected a path string");
      }
      return files.at(key).get<std::string>();
    }
  }
  if (required) throw sd::ValidationError("config.files." + key + ": required for this command");
  return "";
}

std::string out_file(const CommonOpts& opts, const std::string& name) {
  std::filesystem::create_directories(opts.output_dir);
  return (std::filesystem::path(opts.output_dir) / name).string();
}

void write_json_file(const std::string& path, const ordered_json& j) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw sd::DataError("cannot write " + tmp);
    out << j.dump(2) << "\n";
    if (!out) throw sd::DataError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

sd::PosteriorChain pool_chains(const std::vector<sd::PosteriorChain>& chains) {
  sd::PosteriorChain pooled;
  for (const sd::PosteriorChain& c : chains) {
    pooled.draws.insert(pooled.draws.end(), c.draws.begin(), c.draws.end());
  }
  return pooled;
}

// ---------------------------------------------------------------------------

int cmd_extract(const CommonOpts& opts, const std::string& input, bool debug_reconstruct) {
  if (input.empty()) throw sd::ValidationError("--input is required for extract");
  const sd::PairTable pairs = sd::read_pairs_csv(input);

  sd::DirectionTable table;
  table.D = pairs.D;
  int degenerate_dropped = 0;
  int duplicates_dropped = 0;
  double reconstruct_max_error = 0.0;
  std::set<std::string> seen;
  for (const sd::PairRow& row : pairs.rows) {
    const sd::DirectionObservation obs = sd::extract_direction(row.start, row.end);
    if (obs.degenerate) {
      ++degenerate_dropped;
      continue;
    }
    std::string key;
    for (int i = 0; i < row.start.coords.size(); ++i) {
      key += sd::format_double(row.start.coords[i]) + ",";
    }
    key += sd::format_double(obs.theta2);
    for (int i = 0; i < obs.direction.size(); ++i) {
      key += "," + sd::format_double(obs.direction[i]);
    }
    if (!seen.insert(key).second) {
      ++duplicates_dropped;
      continue;
    }
    if (debug_reconstruct) {
      const sd::SimplexPoint back = sd::reconstruct_endpoint(row.start, obs.theta2, obs.direction);
      const double err = (back.coords - row.end.coords).cwiseAbs().maxCoeff();
      reconstruct_max_error = std::max(reconstruct_max_error, err);
      if (err > 1e-6) {
        throw sd::NumericError("reconstruction of row '" + row.location_id + "' is off by " +
                               sd::format_double(err));
      }
    }
    sd::DirectionRow out;
    out.location_id = row.location_id;
    out.start = row.start;
    out.theta2 = obs.theta2;
    out.direction = obs.direction;
    table.rows.push_back(std::move(out));
  }

  const std::string csv_path = out_file(opts, "directions.csv");
  sd::write_directions_csv(csv_path, table);

  ordered_json report;
  report["input_rows"] = static_cast<int>(pairs.rows.size());
  report["output_rows"] = static_cast<int>(table.rows.size());
  report["degenerate_dropped"] = degenerate_dropped;
  report["duplicates_dropped"] = duplicates_dropped;
  report["reconstruct_checked"] = debug_reconstruct;
  if (debug_reconstruct) report["reconstruct_max_error"] = reconstruct_max_error;
  write_json_file(out_file(opts, "directions.report.json"), report);

  std::cout << "extracted " << table.rows.size() << " directions (" << degenerate_dropped
            << " degenerate, " << duplicates_dropped << " duplicate rows dropped) -> " << csv_path
            << "\n";
  return 0;
}

int cmd_simulate(const CommonOpts& opts) {
  const json config = load_config(opts.config_path);
  sd::ScenarioConfig sc = scenario_from_config(config);
  if (opts.seed_given) sc.seed = opts.seed;

  const sd::SimulationResult sim = sd::generate(sc);
  const std::string train_path = out_file(opts, "train.csv");
  sd::write_directions_csv(train_path, sd::directions_from_dataset(sim.train, kSimulatedTheta2));
  sd::write_directions_csv(out_file(opts, "test.csv"),
                           sd::directions_from_dataset(sim.test, kSimulatedTheta2));
  sd::write_truth_json(out_file(opts, "truth.json"), sim.truth);

  std::cout << "simulated " << sc.n_train << "+" << sc.n_test << " movements ("
            << sd::scenario_name(sc.scenario) << ", D=" << sc.D << ", seed=" << sc.seed << ") -> "
            << train_path << "\n";
  return 0;
}

int cmd_fit(const CommonOpts& opts) {
  const json config = load_config(opts.config_path);
  const sd::ModelSpec spec = model_from_config(config);
  SamplerOptions sampler = sampler_from_config(config);
  if (opts.seed_given) sampler.config.seed = opts.seed;
  const sd::EmConfig em_config = em_from_config(config, sampler.config.seed);

  const sd::Dataset train =
      sd::dataset_from_directions(sd::read_directions_csv(file_path(config, "train", true)));
  const sd::ModelContext ctx = sd::make_context(spec, train);

  const sd::EmResult em = sd::run_em(ctx, em_config);
  if (sampler.tune) {
    sd::Rng rng = sd::substream(sampler.config.seed, 0x7374657073697a65ull);  // tuning stream
    sampler.config.hmc_step_size =
        sd::tune_step_size(ctx, em.state, sampler.config, sampler.target_accept, rng);
  }
  const std::vector<sd::PosteriorChain> chains =
      sd::run_chains(ctx, em.state, sampler.config, opts.threads);

  const std::string chain_path = out_file(opts, "chain.jsonl");
  sd::write_chain_archive(chain_path, spec, sampler.config, chains);

  std::cout << "fit K=" << spec.K << " D=" << spec.D << " on N=" << ctx.N() << ": ";
  for (size_t c = 0; c < chains.size(); ++c) {
    std::cout << (c ? ", " : "") << chains[c].draws.size() << " draws (accept "
              << sd::format_double(chains[c].hmc_accept_rate) << ")";
  }
  std::cout << " -> " << chain_path << "\n";
  return 0;
}

struct PredictOptions {
  int replicates = 100;
  std::uint64_t seed = 1;
};

PredictOptions predict_from_config(const json& config, const char* section) {
  PredictOptions out;
  if (!config.contains(section)) return out;
  const json& j = config.at(section);
  check_keys(j, std::string("config.") + section, {"replicates", "seed", "candidates"});
  if (j.contains("replicates")) {
    out.replicates = get_int(j.at("replicates"), std::string("config.") + section + ".replicates");
  }
  if (j.contains("seed")) out.seed = j.at("seed").get<std::uint64_t>();
  return out;
}

int cmd_predict(const CommonOpts& opts) {
  const json config = load_config(opts.config_path);
  PredictOptions popts = predict_from_config(config, "predict");
  if (opts.seed_given) popts.seed = opts.seed;

  const sd::ChainArchive archive = sd::read_chain_archive(file_path(config, "chain", true));
  const sd::Dataset train =
      sd::dataset_from_directions(sd::read_directions_csv(file_path(config, "train", true)));
  const sd::Dataset held =
      sd::dataset_from_directions(sd::read_directions_csv(file_path(config, "held", true)));

  sd::Rng rng = sd::make_rng(popts.seed);
  const sd::PosteriorChain pooled = pool_chains(archive.chains);
  const sd::PredictiveReport report =
      sd::posterior_predictive(archive.spec, pooled, train, held, popts.replicates, rng);

  ordered_json j;
  j["log_predictive"] = report.log_predictive;
  j["posterior_draws"] = report.posterior_draws;
  j["predictive_draws"] = report.predictive_draws;
  ordered_json per_point = ordered_json::array();
  for (int i = 0; i < report.per_point_log.size(); ++i) per_point.push_back(report.per_point_log[i]);
  j["per_point_log"] = std::move(per_point);
  const std::string path = out_file(opts, "predictive.json");
  write_json_file(path, j);

  std::cout << "log posterior predictive " << sd::format_double(report.log_predictive) << " over "
            << report.per_point_log.size() << " withheld points -> " << path << "\n";
  return 0;
}

int cmd_select(const CommonOpts& opts) {
  const json config = load_config(opts.config_path);
  if (!config.contains("selection")) throw sd::ValidationError("config.selection: missing section");
  const json& sel = config.at("selection");
  check_keys(sel, "config.selection", {"candidates", "replicates", "seed"});
  PredictOptions popts = predict_from_config(config, "selection");
  if (opts.seed_given) popts.seed = opts.seed;
  if (!sel.contains("candidates") || !sel.at("candidates").is_array() ||
      sel.at("candidates").empty()) {
    throw sd::ValidationError("config.selection.candidates: expected a non-empty array");
  }

  const sd::Dataset train =
      sd::dataset_from_directions(sd::read_directions_csv(file_path(config, "train", true)));
  const sd::Dataset held =
      sd::dataset_from_directions(sd::read_directions_csv(file_path(config, "held", true)));

  std::vector<std::pair<std::string, sd::PredictiveReport>> reports;
  for (size_t i = 0; i < sel.at("candidates").size(); ++i) {
    const json& cand = sel.at("candidates")[i];
    const std::string where = "config.selection.candidates[" + std::to_string(i) + "]";
    check_keys(cand, where, {"name", "chain"});
    if (!cand.contains("name") || !cand.contains("chain")) {
      throw sd::ValidationError(where + ": name and chain are required");
    }
    const std::string name = cand.at("name").get<std::string>();
    const sd::ChainArchive archive = sd::read_chain_archive(cand.at("chain").get<std::string>());
    sd::Rng rng = sd::substream(popts.seed, i);
    reports.emplace_back(name, sd::posterior_predictive(archive.spec, pool_chains(archive.chains),
                                                        train, held, popts.replicates, rng));
  }
  const std::string chosen = sd::select_model(reports);

  ordered_json scores = ordered_json::array();
  for (const auto& [name, report] : reports) {
    ordered_json s;
    s["name"] = name;
    s["log_predictive"] = report.log_predictive;
    s["posterior_draws"] = report.posterior_draws;
    scores.push_back(std::move(s));
  }
  ordered_json j;
  j["chosen"] = chosen;
  j["replicates"] = popts.replicates;
  j["scores"] = std::move(scores);
  const std::string path = out_file(opts, "selection.json");
  write_json_file(path, j);

  std::cout << "selected " << chosen << " among " << reports.size() << " candidates -> " << path
            << "\n";
  return 0;
}

int cmd_diagnose(const CommonOpts& opts) {
  const json config = load_config(opts.config_path);
  double level = 0.95;
  if (config.contains("diagnose")) {
    check_keys(config.at("diagnose"), "config.diagnose", {"level"});
    if (config.at("diagnose").contains("level")) {
      level = get_number(config.at("diagnose").at("level"), "config.diagnose.level");
    }
  }

  const sd::ChainArchive archive = sd::read_chain_archive(file_path(config, "chain", true));
  const int K = archive.spec.K;

  ordered_json j;
  j["chains"] = static_cast<int>(archive.chains.size());
  ordered_json draws = ordered_json::array();
  ordered_json accepts = ordered_json::array();
  for (const sd::PosteriorChain& c : archive.chains) {
    draws.push_back(static_cast<int>(c.draws.size()));
    accepts.push_back(c.hmc_accept_rate);
  }
  j["draws"] = std::move(draws);
  j["hmc_accept_rate"] = std::move(accepts);

  // split-rhat over scalar traces, when there is more than one chain to compare
  ordered_json rhats;
  bool can_rhat = archive.chains.size() >= 2;
  for (const sd::PosteriorChain& c : archive.chains) {
    can_rhat = can_rhat && c.draws.size() >= 4 && c.draws.size() == archive.chains[0].draws.size();
  }
  if (can_rhat) {
    auto trace_rhat = [&](auto scalar) {
      std::vector<std::vector<double>> traces;
      for (const sd::PosteriorChain& c : archive.chains) {
        std::vector<double> t;
        t.reserve(c.draws.size());
        for (const sd::ParameterState& s : c.draws) t.push_back(scalar(s));
        traces.push_back(std::move(t));
      }
      return sd::rhat(traces);
    };
    for (int k = 0; k < K; ++k) {
      rhats["nu_" + std::to_string(k + 1)] = trace_rhat([k](const sd::ParameterState& s) {
        return s.nu[k];
      });
      rhats["rho_bar_" + std::to_string(k + 1)] = trace_rhat([k](const sd::ParameterState& s) {
        return s.rho.row(k).mean();
      });
      if (K > 1) {
        const int n = static_cast<int>(archive.chains[0].draws[0].zeta.size());
        rhats["label_share_" + std::to_string(k + 1)] =
            trace_rhat([k, n](const sd::ParameterState& s) {
              int count = 0;
              for (int z : s.zeta) count += z == k;
              return static_cast<double>(count) / n;
            });
      }
    }
    j["rhat"] = std::move(rhats);
  } else {
    j["rhat"] = nullptr;
  }

  const std::string truth_path = file_path(config, "truth", false);
  if (!truth_path.empty()) {
    const sd::SimulationTruth truth = sd::read_truth_json(truth_path);
    const sd::RecoveryReport recovery =
        sd::recovery_report(pool_chains(archive.chains), truth, level);
    ordered_json rec;
    rec["level"] = recovery.level;
    rec["permutation"] = recovery.permutation;
    ordered_json comps = ordered_json::array();
    for (const sd::ComponentRecovery& c : recovery.components) {
      ordered_json cc;
      cc["truth_index"] = c.truth_index;
      cc["coverage"] = c.coverage;
      if (archive.spec.D == 2) {
        cc["post_mean_angle"] = c.post_mean_angle;
        cc["truth_mean_angle"] = c.truth_mean_angle;
      }
      ordered_json pd = ordered_json::array(), td = ordered_json::array();
      for (int i = 0; i < c.post_mean_direction.size(); ++i) pd.push_back(c.post_mean_direction[i]);
      for (int i = 0; i < c.truth_mean_direction.size(); ++i) td.push_back(c.truth_mean_direction[i]);
      cc["post_mean_direction"] = std::move(pd);
      cc["truth_mean_direction"] = std::move(td);
      cc["post_rho_bar"] = c.post_rho_bar;
      cc["truth_rho_bar"] = c.truth_rho_bar;
      cc["post_lambda"] = c.post_lambda;
      cc["truth_lambda"] = c.truth_lambda;
      comps.push_back(std::move(cc));
    }
    rec["components"] = std::move(comps);
    j["recovery"] = std::move(rec);
  }

  const std::string path = out_file(opts, "diagnostics.json");
  write_json_file(path, j);

  std::cout << "diagnostics for " << archive.chains.size() << " chain(s)";
  if (j.contains("recovery")) {
    std::cout << ", coverage";
    for (const auto& c : j["recovery"]["components"]) {
      std::cout << " " << sd::format_double(c["coverage"].get<double>());
    }
  }
  std::cout << " -> " << path << "\n";
  return 0;
}

void add_common(CLI::App* sub, CommonOpts& opts, bool with_config = true) {
  if (with_config) sub->add_option("--config", opts.config_path, "JSON configuration file");
  sub->add_option("--output", opts.output_dir, "output directory (default .)");
  sub->add_option("--seed", opts.seed, "seed override")->each([&opts](const std::string&) {
    opts.seed_given = true;
  });
  sub->add_option("--threads", opts.threads, "parallel worker cap (0 = one per chain)")
      ->envname("SIMPLEX_DRIFT_THREADS");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial model pipeline for directions of movement on the simplex"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string extract_input;
  bool debug_reconstruct = false;

  CLI::App* extract = app.add_subcommand("extract", "movement pairs -> direction observations");
  extract->add_option("--input", extract_input, "movement pairs CSV")->required();
  extract->add_flag("--debug-reconstruct", debug_reconstruct,
                    "verify that each direction reproduces its end proportions");
  add_common(extract, opts, false);

  CLI::App* simulate = app.add_subcommand("simulate", "generate scenario data");
  add_common(simulate, opts);
  CLI::App* fit = app.add_subcommand("fit", "sample the posterior by MCMC");
  add_common(fit, opts);
  CLI::App* predict = app.add_subcommand("predict", "score withheld data under a fitted chain");
  add_common(predict, opts);
  CLI::App* select = app.add_subcommand("select", "rank candidate fits by predictive score");
  add_common(select, opts);
  CLI::App* diagnose = app.add_subcommand("diagnose", "chain and recovery summaries");
  add_common(diagnose, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (extract->parsed()) return cmd_extract(opts, extract_input, debug_reconstruct);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (fit->parsed()) return cmd_fit(opts);
    if (predict->parsed()) return cmd_predict(opts);
    if (select->parsed()) return cmd_select(opts);
    if (diagnose->parsed()) return cmd_diagnose(opts);
  } catch (const sd::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const sd::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const sd::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
