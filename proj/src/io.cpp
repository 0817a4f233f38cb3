#include "simplexdrift/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "simplexdrift/errors.hpp"

namespace simplexdrift {

namespace {

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_number(const std::string& tok, const std::string& path, int line_no,
                    const std::string& column) {
  double v = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || tok.empty()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": cannot parse '" + tok +
                    "' in column " + column);
  }
  return v;
}

SimplexPoint parse_proportions(const std::vector<std::string>& fields, int first, int count,
                               const std::string& path, int line_no, char prefix) {
  Vec p(count);
  for (int i = 0; i < count; ++i) {
    p[i] = parse_number(fields[first + i], path, line_no,
                        std::string(1, prefix) + "_" + std::to_string(i + 1));
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    throw DataError(path + ":" + std::to_string(line_no) + ": proportions sum to " +
                    format_double(total) + ", expected 1 within 1e-6");
  }
  try {
    return SimplexPoint::create(p);
  } catch (const ValidationError& err) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + err.what());
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.empty()) throw DataError(path + ": empty file");
  return lines;
}

// header token run p_1..p_n starting at `first`; returns count
int count_prefixed(const std::vector<std::string>& header, size_t first, char prefix) {
  int n = 0;
  while (first + n < header.size() &&
         header[first + n] == std::string(1, prefix) + "_" + std::to_string(n + 1)) {
    ++n;
  }
  return n;
}

// writes through a temporary so a failed write never leaves a partial file
class AtomicWriter {
 public:
  explicit AtomicWriter(const std::string& path) : path_(path), tmp_(path + ".tmp"), out_(tmp_) {
    if (!out_) throw DataError("cannot write " + tmp_);
  }
  ~AtomicWriter() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.close();
    if (!out_) throw DataError("write failed for " + tmp_);
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

ordered_json vec_to_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat_to_json(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vec vec_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError(what + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

Mat mat_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array of rows");
  if (j.empty()) return Mat(0, 0);
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw DataError(what + ": ragged rows");
    }
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

const char* family_name(KernelFamily f) {
  return f == KernelFamily::squared_exponential ? "squared_exponential" : "matern";
}

KernelFamily family_from_name(const std::string& s) {
  if (s == "squared_exponential") return KernelFamily::squared_exponential;
  if (s == "matern") return KernelFamily::matern;
  throw DataError("unknown kernel family '" + s + "'");
}

ordered_json kernel_to_json(const KernelConfig& k) {
  ordered_json j;
  j["family"] = family_name(k.family);
  j["sigma"] = k.sigma;
  j["omega"] = k.omega;
  j["nu"] = k.nu;
  j["amplitude"] = k.amplitude;
  return j;
}

KernelConfig kernel_from_json(const json& j) {
  KernelConfig k;
  k.family = family_from_name(j.at("family").get<std::string>());
  k.sigma = j.at("sigma").get<double>();
  k.omega = j.at("omega").get<double>();
  k.nu = j.at("nu").get<double>();
  k.amplitude = j.at("amplitude").get<double>();
  return k;
}

ordered_json spec_to_json(const ModelSpec& spec) {
  ordered_json j;
  j["K"] = spec.K;
  j["D"] = spec.D;
  j["kernel"] = kernel_to_json(spec.kernel);
  ordered_json comp = ordered_json::array();
  for (const KernelConfig& k : spec.component_kernels) comp.push_back(kernel_to_json(k));
  j["component_kernels"] = std::move(comp);
  j["gp_means"] = mat_to_json(spec.gp_means);
  j["varsigma"] = spec.varsigma;
  j["tau"] = spec.tau;
  j["lambda"] = vec_to_json(spec.lambda);
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  spec.K = j.at("K").get<int>();
  spec.D = j.at("D").get<int>();
  spec.kernel = kernel_from_json(j.at("kernel"));
  for (const json& k : j.at("component_kernels")) {
    spec.component_kernels.push_back(kernel_from_json(k));
  }
  spec.gp_means = mat_from_json(j.at("gp_means"), "gp_means");
  spec.varsigma = j.at("varsigma").get<double>();
  spec.tau = j.at("tau").get<double>();
  spec.lambda = vec_from_json(j.at("lambda"), "lambda");
  return spec;
}

json parse_json_line(const std::string& text, const std::string& path, int line_no) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON");
  }
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

PairTable read_pairs_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  const std::vector<std::string> header = split_csv(lines[0]);
  if (header.empty() || header[0] != "location_id") {
    throw DataError(path + ":1: header must start with location_id");
  }
  const int dp1 = count_prefixed(header, 1, 'p');
  if (dp1 < 3) throw DataError(path + ":1: expected columns p_1..p_{D+1} with D >= 2");
  const int dq1 = count_prefixed(header, 1 + dp1, 'q');
  if (dq1 != dp1 || header.size() != static_cast<size_t>(1 + 2 * dp1)) {
    throw DataError(path + ":1: expected columns q_1..q_" + std::to_string(dp1) +
                    " after the start proportions");
  }

  PairTable table;
  table.D = dp1 - 1;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const int line_no = static_cast<int>(i + 1);
    const std::vector<std::string> fields = split_csv(lines[i]);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    PairRow row;
    row.location_id = fields[0];
    row.start = parse_proportions(fields, 1, dp1, path, line_no, 'p');
    row.end = parse_proportions(fields, 1 + dp1, dp1, path, line_no, 'q');
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_pairs_csv(const std::string& path, const PairTable& table) {
  AtomicWriter writer(path);
  std::ofstream& out = writer.stream();
  out << "location_id";
  for (int i = 1; i <= table.D + 1; ++i) out << ",p_" << i;
  for (int i = 1; i <= table.D + 1; ++i) out << ",q_" << i;
  out << "\n";
  for (const PairRow& row : table.rows) {
    out << row.location_id;
    for (int i = 0; i <= table.D; ++i) out << "," << format_double(row.start.coords[i]);
    for (int i = 0; i <= table.D; ++i) out << "," << format_double(row.end.coords[i]);
    out << "\n";
  }
  writer.commit();
}

DirectionTable read_directions_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  const std::vector<std::string> header = split_csv(lines[0]);
  if (header.empty() || header[0] != "location_id") {
    throw DataError(path + ":1: header must start with location_id");
  }
  const int dp1 = count_prefixed(header, 1, 'p');
  if (dp1 < 3) throw DataError(path + ":1: expected columns p_1..p_{D+1} with D >= 2");
  const int D = dp1 - 1;
  if (header.size() <= static_cast<size_t>(1 + dp1) || header[1 + dp1] != "theta2") {
    throw DataError(path + ":1: expected theta2 after the start proportions");
  }
  const int dy = count_prefixed(header, 2 + dp1, 'y');
  if (dy != D - 1 || header.size() != static_cast<size_t>(2 + dp1 + dy)) {
    throw DataError(path + ":1: expected columns y_1..y_" + std::to_string(D - 1) +
                    " after theta2");
  }

  DirectionTable table;
  table.D = D;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const int line_no = static_cast<int>(i + 1);
    const std::vector<std::string> fields = split_csv(lines[i]);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    DirectionRow row;
    row.location_id = fields[0];
    row.start = parse_proportions(fields, 1, dp1, path, line_no, 'p');
    row.theta2 = parse_number(fields[1 + dp1], path, line_no, "theta2");
    if (!(row.theta2 >= 0.0 && row.theta2 <= 1.5707963267948966 + 1e-9)) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": theta2 must lie in [0, pi/2], found " + format_double(row.theta2));
    }
    row.direction = Vec(D - 1);
    for (int d = 0; d < D - 1; ++d) {
      row.direction[d] = parse_number(fields[2 + dp1 + d], path, line_no,
                                      "y_" + std::to_string(d + 1));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_directions_csv(const std::string& path, const DirectionTable& table) {
  AtomicWriter writer(path);
  std::ofstream& out = writer.stream();
  out << "location_id";
  for (int i = 1; i <= table.D + 1; ++i) out << ",p_" << i;
  out << ",theta2";
  for (int i = 1; i <= table.D - 1; ++i) out << ",y_" << i;
  out << "\n";
  for (const DirectionRow& row : table.rows) {
    out << row.location_id;
    for (int i = 0; i <= table.D; ++i) out << "," << format_double(row.start.coords[i]);
    out << "," << format_double(row.theta2);
    for (int d = 0; d < table.D - 1; ++d) out << "," << format_double(row.direction[d]);
    out << "\n";
  }
  writer.commit();
}

Dataset dataset_from_directions(const DirectionTable& table) {
  const int N = static_cast<int>(table.rows.size());
  if (N == 0) throw DataError("direction table has no rows");
  std::vector<SimplexPoint> locs;
  locs.reserve(N);
  std::vector<char> degenerate(N, 0);
  for (int i = 0; i < N; ++i) {
    locs.push_back(table.rows[i].start);
    degenerate[i] = table.rows[i].theta2 == 0.0;
  }
  if (table.D == 2) {
    Vec angles(N);
    for (int i = 0; i < N; ++i) angles[i] = table.rows[i].direction[0];
    return Dataset::from_angles(std::move(locs), std::move(angles), std::move(degenerate));
  }
  Mat sphere_angles(table.D - 1, N);
  for (int i = 0; i < N; ++i) sphere_angles.col(i) = table.rows[i].direction;
  return Dataset::from_sphere_angles(std::move(locs), sphere_angles, std::move(degenerate));
}

DirectionTable directions_from_dataset(const Dataset& data, double theta2_fill) {
  DirectionTable table;
  table.D = data.dims();
  table.rows.reserve(data.n());
  for (int i = 0; i < data.n(); ++i) {
    DirectionRow row;
    row.location_id = "loc_" + std::to_string(i);
    row.start = data.locations[i];
    const bool degen = !data.degenerate.empty() && data.degenerate[i];
    row.theta2 = degen ? 0.0 : theta2_fill;
    if (table.D == 2) {
      row.direction = Vec::Constant(1, data.angles[i]);
    } else {
      row.direction = cartesian_to_spherical(data.directions.col(i));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string spec_fingerprint(const ModelSpec& spec) {
  const std::string canon = spec_to_json(spec).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void write_chain_archive(const std::string& path, const ModelSpec& spec,
                         const SamplerConfig& config, const std::vector<PosteriorChain>& chains) {
  if (chains.empty()) throw ValidationError("chain archive needs at least one chain");
  int N = 0;
  if (!chains[0].draws.empty() && !chains[0].draws[0].z.empty()) {
    N = static_cast<int>(chains[0].draws[0].z[0].cols());
  }

  ordered_json header;
  header["format"] = "simplex-drift-chain/1";
  header["fingerprint"] = spec_fingerprint(spec);
  header["seed"] = config.seed;
  header["iterations"] = config.iterations;
  header["burn_in"] = config.burn_in;
  header["thin"] = config.thin;
  header["chains"] = static_cast<int>(chains.size());
  header["K"] = spec.K;
  header["D"] = spec.D;
  header["N"] = N;
  header["spec"] = spec_to_json(spec);
  // wall-clock time is excluded so reruns with one seed stay byte-identical
  ordered_json stats = ordered_json::array();
  for (const PosteriorChain& chain : chains) {
    ordered_json s;
    s["draws"] = static_cast<int>(chain.draws.size());
    s["hmc_accept_rate"] = chain.hmc_accept_rate;
    s["ess_mean_shrink"] = chain.ess_mean_shrink;
    stats.push_back(std::move(s));
  }
  header["chain_stats"] = std::move(stats);

  AtomicWriter writer(path);
  std::ofstream& out = writer.stream();
  out << header.dump() << "\n";
  for (size_t c = 0; c < chains.size(); ++c) {
    for (const ParameterState& s : chains[c].draws) {
      ordered_json line;
      line["chain"] = static_cast<int>(c);
      ordered_json zs = ordered_json::array();
      for (const Mat& zk : s.z) zs.push_back(mat_to_json(zk));
      line["z"] = std::move(zs);
      line["varphi"] = mat_to_json(s.varphi);
      line["nu"] = vec_to_json(s.nu);
      line["zeta"] = s.zeta;
      line["lambda"] = vec_to_json(s.lambda);
      out << line.dump() << "\n";
    }
  }
  writer.commit();
}

ChainArchive read_chain_archive(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  const json header = parse_json_line(lines[0], path, 1);
  if (!header.contains("format") || header.at("format") != "simplex-drift-chain/1") {
    throw DataError(path + ": not a chain archive (bad format tag)");
  }
  ChainArchive archive;
  archive.spec = spec_from_json(header.at("spec"));
  archive.spec.validate();
  archive.seed = header.at("seed").get<std::uint64_t>();
  archive.fingerprint = header.at("fingerprint").get<std::string>();
  const int n_chains = header.at("chains").get<int>();
  if (n_chains < 1) throw DataError(path + ": chain count must be positive");
  archive.chains.resize(n_chains);

  const int K = archive.spec.K;
  const int D = archive.spec.D;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const int line_no = static_cast<int>(i + 1);
    const json j = parse_json_line(lines[i], path, line_no);
    const int c = j.at("chain").get<int>();
    if (c < 0 || c >= n_chains) {
      throw DataError(path + ":" + std::to_string(line_no) + ": chain index out of range");
    }
    ParameterState s;
    const json& zs = j.at("z");
    if (!zs.is_array() || static_cast<int>(zs.size()) != K) {
      throw DataError(path + ":" + std::to_string(line_no) + ": z must hold K matrices");
    }
    int N = -1;
    for (const json& zk : zs) {
      Mat m = mat_from_json(zk, "z");
      if (m.rows() != D || (N >= 0 && m.cols() != N)) {
        throw DataError(path + ":" + std::to_string(line_no) + ": z shape mismatch");
      }
      N = static_cast<int>(m.cols());
      s.z.push_back(std::move(m));
    }
    s.varphi = mat_from_json(j.at("varphi"), "varphi");
    s.nu = vec_from_json(j.at("nu"), "nu");
    s.lambda = vec_from_json(j.at("lambda"), "lambda");
    s.zeta = j.at("zeta").get<std::vector<int>>();
    if (s.varphi.rows() != K || s.varphi.cols() != N || s.nu.size() != K ||
        s.lambda.size() != K || static_cast<int>(s.zeta.size()) != N) {
      throw DataError(path + ":" + std::to_string(line_no) + ": draw shapes disagree");
    }
    for (int z : s.zeta) {
      if (z < 0 || z >= K) {
        throw DataError(path + ":" + std::to_string(line_no) + ": label out of range");
      }
    }

    // derived caches are rebuilt, not trusted from disk; scalar std::exp so
    // the rebuilt values match the sampler's own cache bit for bit
    s.rho = Mat(K, N);
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < N; ++l) s.rho(k, l) = std::exp(s.varphi(k, l));
    }
    s.log_norm = Mat(K, N);
    s.mean_dir.assign(K, Mat(D, N));
    if (D == 2) s.mean_angle = Mat(K, N);
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < N; ++l) {
        s.log_norm(k, l) = vmf_log_normalizer(D, s.rho(k, l));
        const double nrm = s.z[k].col(l).norm();
        if (nrm < 1e-12) {
          throw DataError(path + ":" + std::to_string(line_no) +
                          ": latent column collapses to zero");
        }
        s.mean_dir[k].col(l) = s.z[k].col(l) / nrm;
        if (D == 2) s.mean_angle(k, l) = arctan_star(s.z[k](0, l), s.z[k](1, l));
      }
    }
    archive.chains[c].draws.push_back(std::move(s));
  }

  const json& stats = header.at("chain_stats");
  if (stats.is_array() && static_cast<int>(stats.size()) == n_chains) {
    for (int c = 0; c < n_chains; ++c) {
      archive.chains[c].hmc_accept_rate = stats[c].value("hmc_accept_rate", 0.0);
      archive.chains[c].ess_mean_shrink = stats[c].value("ess_mean_shrink", 0.0);
    }
  }
  return archive;
}

void write_truth_json(const std::string& path, const SimulationTruth& truth) {
  ordered_json j;
  j["format"] = "simplex-drift-truth/1";
  ordered_json cfg;
  cfg["scenario"] = scenario_name(truth.config.scenario);
  cfg["D"] = truth.config.D;
  cfg["n_train"] = truth.config.n_train;
  cfg["n_test"] = truth.config.n_test;
  cfg["seed"] = truth.config.seed;
  ordered_json means = ordered_json::array();
  for (const Vec& m : truth.config.component_means) means.push_back(vec_to_json(m));
  cfg["component_means"] = std::move(means);
  cfg["concentrations"] = vec_to_json(truth.config.concentrations);
  cfg["kernel"] = kernel_to_json(truth.config.kernel);
  cfg["gp_means"] = mat_to_json(truth.config.gp_means);
  cfg["nu"] = vec_to_json(truth.config.nu);
  cfg["varsigma"] = truth.config.varsigma;
  cfg["mixing"] = vec_to_json(truth.config.mixing);
  j["config"] = std::move(cfg);
  j["labels_train"] = truth.labels_train;
  j["labels_test"] = truth.labels_test;
  auto mats = [](const std::vector<Mat>& ms) {
    ordered_json a = ordered_json::array();
    for (const Mat& m : ms) a.push_back(mat_to_json(m));
    return a;
  };
  j["mean_dir_train"] = mats(truth.mean_dir_train);
  j["mean_dir_test"] = mats(truth.mean_dir_test);
  j["rho_train"] = mat_to_json(truth.rho_train);
  j["rho_test"] = mat_to_json(truth.rho_test);
  j["z_train"] = mats(truth.z_train);
  j["z_test"] = mats(truth.z_test);

  AtomicWriter writer(path);
  writer.stream() << j.dump(2) << "\n";
  writer.commit();
}

SimulationTruth read_truth_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const json j = parse_json_line(buf.str(), path, 1);
  if (!j.contains("format") || j.at("format") != "simplex-drift-truth/1") {
    throw DataError(path + ": not a truth record (bad format tag)");
  }

  SimulationTruth truth;
  const json& cfg = j.at("config");
  truth.config.scenario = parse_scenario(cfg.at("scenario").get<std::string>());
  truth.config.D = cfg.at("D").get<int>();
  truth.config.n_train = cfg.at("n_train").get<int>();
  truth.config.n_test = cfg.at("n_test").get<int>();
  truth.config.seed = cfg.at("seed").get<std::uint64_t>();
  for (const json& m : cfg.at("component_means")) {
    truth.config.component_means.push_back(vec_from_json(m, "component_means"));
  }
  truth.config.concentrations = vec_from_json(cfg.at("concentrations"), "concentrations");
  truth.config.kernel = kernel_from_json(cfg.at("kernel"));
  truth.config.gp_means = mat_from_json(cfg.at("gp_means"), "gp_means");
  truth.config.nu = vec_from_json(cfg.at("nu"), "nu");
  truth.config.varsigma = cfg.at("varsigma").get<double>();
  truth.config.mixing = vec_from_json(cfg.at("mixing"), "mixing");

  truth.labels_train = j.at("labels_train").get<std::vector<int>>();
  truth.labels_test = j.at("labels_test").get<std::vector<int>>();
  auto mats = [&](const json& a, const std::string& what) {
    std::vector<Mat> out;
    for (const json& m : a) out.push_back(mat_from_json(m, what));
    return out;
  };
  truth.mean_dir_train = mats(j.at("mean_dir_train"), "mean_dir_train");
  truth.mean_dir_test = mats(j.at("mean_dir_test"), "mean_dir_test");
  truth.rho_train = mat_from_json(j.at("rho_train"), "rho_train");
  truth.rho_test = mat_from_json(j.at("rho_test"), "rho_test");
  truth.z_train = mats(j.at("z_train"), "z_train");
  truth.z_test = mats(j.at("z_test"), "z_test");

  try {
    truth.config.validate();
  } catch (const ValidationError& err) {
    throw DataError(path + ": " + err.what());
  }
  const size_t K = truth.mean_dir_train.size();
  if (K == 0 || truth.labels_train.size() != static_cast<size_t>(truth.config.n_train)) {
    throw DataError(path + ": truth record shapes disagree");
  }
  return truth;
}

}  // namespace simplexdrift
