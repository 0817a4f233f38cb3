// NumPy-facing bindings: direction extraction, scenario simulation, MCMC
// fitting, posterior-predictive scoring, and chain summaries. Matrices cross
// the boundary row-major per Python convention (observations are rows here,
// columns in the C++ core).

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "simplexdrift/diagnostics.hpp"
#include "simplexdrift/em_init.hpp"
#include "simplexdrift/selection.hpp"

namespace py = pybind11;
using namespace simplexdrift;

namespace {

std::vector<SimplexPoint> locations_from_rows(const Mat& rows) {
  std::vector<SimplexPoint> out;
  out.reserve(rows.rows());
  for (int i = 0; i < rows.rows(); ++i) {
    out.push_back(SimplexPoint::create(rows.row(i).transpose()));
  }
  return out;
}

Mat locations_to_rows(const std::vector<SimplexPoint>& locs) {
  if (locs.empty()) return Mat(0, 0);
  Mat rows(static_cast<int>(locs.size()), locs[0].coords.size());
  for (size_t i = 0; i < locs.size(); ++i) rows.row(static_cast<int>(i)) = locs[i].coords;
  return rows;
}

std::vector<char> degenerate_from_python(const std::vector<bool>& flags) {
  return std::vector<char>(flags.begin(), flags.end());
}

// posterior draws plus the spec that produced them
struct FitResult {
  ModelSpec spec;
  std::vector<PosteriorChain> chains;
  double em_objective = 0.0;
  double step_size = 0.0;
  int n = 0;
};

const PosteriorChain& chain_at(const FitResult& fit, int c) {
  if (c < 0 || c >= static_cast<int>(fit.chains.size())) {
    throw ValidationError("chain index out of range");
  }
  return fit.chains[c];
}

PosteriorChain pooled_chain(const FitResult& fit) {
  PosteriorChain pooled;
  for (const PosteriorChain& c : fit.chains) {
    pooled.draws.insert(pooled.draws.end(), c.draws.begin(), c.draws.end());
  }
  return pooled;
}

FitResult fit_impl(const Dataset& train, int K, Mat gp_means, double sigma, double omega,
                   double varsigma, double tau, int iterations, int burn_in, int thin, int chains,
                   std::uint64_t seed, bool tune, double target_accept, double step_size,
                   int leapfrog_steps, int em_restarts, int em_max_iters, int threads) {
  ModelSpec spec;
  spec.K = K;
  spec.D = train.dims();
  spec.kernel.sigma = sigma;
  spec.kernel.omega = omega;
  spec.varsigma = varsigma;
  spec.tau = tau;
  spec.gp_means = gp_means.size() ? gp_means : Mat::Zero(K, spec.D);
  spec.lambda = Vec::Constant(K, 1.0 / K);
  spec.validate();

  SamplerConfig config;
  config.iterations = iterations;
  config.burn_in = burn_in;
  config.thin = thin;
  config.chains = chains;
  config.seed = seed;
  config.hmc_step_size = step_size;
  config.hmc_leapfrog_steps = leapfrog_steps;

  const ModelContext ctx = make_context(spec, train);
  EmConfig em_config;
  em_config.restarts = em_restarts;
  em_config.max_iters = em_max_iters;
  em_config.seed = seed;
  const EmResult em = run_em(ctx, em_config);

  if (tune) {
    Rng rng = substream(seed, 0x7374657073697a65ull);  // tuning stream
    config.hmc_step_size = tune_step_size(ctx, em.state, config, target_accept, rng);
  }

  FitResult fit;
  fit.spec = spec;
  fit.chains = run_chains(ctx, em.state, config, threads);
  fit.em_objective = em.objective;
  fit.step_size = config.hmc_step_size;
  fit.n = ctx.N();
  return fit;
}

// draws x K x N array from a per-draw K x N matrix accessor
template <typename Getter>
py::array_t<double> stack_matrices(const PosteriorChain& chain, int K, int N, Getter get) {
  const int n_draws = static_cast<int>(chain.draws.size());
  py::array_t<double> out({n_draws, K, N});
  auto view = out.mutable_unchecked<3>();
  for (int i = 0; i < n_draws; ++i) {
    const Mat m = get(chain.draws[i]);
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < N; ++l) view(i, k, l) = m(k, l);
    }
  }
  return out;
}

py::array_t<double> stack_vectors(const PosteriorChain& chain, int K,
                                  const Vec ParameterState::*field) {
  const int n_draws = static_cast<int>(chain.draws.size());
  py::array_t<double> out({n_draws, K});
  auto view = out.mutable_unchecked<2>();
  for (int i = 0; i < n_draws; ++i) {
    for (int k = 0; k < K; ++k) view(i, k) = (chain.draws[i].*field)[k];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "directions of movement on probability simplices: extraction, "
            "simulation, spatial mixture fitting, and summaries";

  const auto validation =
      py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", validation.ptr());
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  // geometry -----------------------------------------------------------
  m.def("arctan_star", &arctan_star, py::arg("z1"), py::arg("z2"),
        "two-argument arctangent with range [0, 2*pi); (0, 0) maps to 0");
  m.def(
      "extract_direction",
      [](const Vec& start, const Vec& end) {
        const DirectionObservation obs =
            extract_direction(SimplexPoint::create(start), SimplexPoint::create(end));
        return py::make_tuple(obs.theta2, obs.direction, obs.degenerate);
      },
      py::arg("start"), py::arg("end"),
      "movement between two proportion vectors -> (theta2, direction, degenerate)");
  m.def(
      "reconstruct_endpoint",
      [](const Vec& start, double theta2, const Vec& direction) {
        return reconstruct_endpoint(SimplexPoint::create(start), theta2, direction).coords;
      },
      py::arg("start"), py::arg("theta2"), py::arg("direction"),
      "inverse of extract_direction: the end proportions of the movement");
  m.def("spherical_to_cartesian", &spherical_to_cartesian, py::arg("angles"));
  m.def("cartesian_to_spherical", &cartesian_to_spherical, py::arg("unit_vector"));

  // distributions ------------------------------------------------------
  m.def("log_bessel_i", &log_bessel_i, py::arg("order"), py::arg("x"));
  m.def("vmf_log_normalizer", &vmf_log_normalizer, py::arg("p"), py::arg("rho"),
        "log normalizing constant of the directional density on S^{p-1}");

  // data ----------------------------------------------------------------
  py::class_<Dataset>(m, "Dataset", "observed directions at simplex locations")
      .def_static(
          "from_angles",
          [](const Mat& locations, const Vec& angles, const std::vector<bool>& degenerate) {
            return Dataset::from_angles(locations_from_rows(locations), angles,
                                        degenerate_from_python(degenerate));
          },
          py::arg("locations"), py::arg("angles"),
          py::arg("degenerate") = std::vector<bool>{},
          "circular observations: locations is (n, 3) proportions, angles is (n,)")
      .def_static(
          "from_unit_vectors",
          [](const Mat& locations, const Mat& directions, const std::vector<bool>& degenerate) {
            return Dataset::from_unit_vectors(locations_from_rows(locations),
                                              directions.transpose(),
                                              degenerate_from_python(degenerate));
          },
          py::arg("locations"), py::arg("directions"),
          py::arg("degenerate") = std::vector<bool>{},
          "locations is (n, D+1) proportions, directions is (n, D) unit rows")
      .def_property_readonly("locations",
                             [](const Dataset& d) { return locations_to_rows(d.locations); })
      .def_property_readonly("directions",
                             [](const Dataset& d) { return Mat(d.directions.transpose()); })
      .def_property_readonly("angles", [](const Dataset& d) { return d.angles; })
      .def_property_readonly(
          "degenerate",
          [](const Dataset& d) { return std::vector<bool>(d.degenerate.begin(), d.degenerate.end()); })
      .def("__len__", [](const Dataset& d) { return d.n(); })
      .def("__repr__", [](const Dataset& d) {
        return "Dataset(n=" + std::to_string(d.n()) + ", D=" + std::to_string(d.dims()) + ")";
      });

  // simulation ----------------------------------------------------------
  m.def(
      "simulate",
      [](const std::string& scenario, int D, int n_train, int n_test, std::uint64_t seed) {
        ScenarioConfig sc = default_scenario(parse_scenario(scenario), D);
        sc.n_train = n_train;
        sc.n_test = n_test;
        sc.seed = seed;
        sc.validate();
        SimulationResult sim;
        {
          py::gil_scoped_release release;
          sim = generate(sc);
        }
        py::dict out;
        out["train"] = sim.train;
        out["test"] = sim.test;
        out["labels_train"] = sim.truth.labels_train;
        out["labels_test"] = sim.truth.labels_test;
        out["rho_train"] = sim.truth.rho_train;
        out["mixing"] = sim.truth.config.mixing;
        out["nu"] = sim.truth.config.nu;
        py::list mean_dir;
        for (const Mat& mk : sim.truth.mean_dir_train) mean_dir.append(Mat(mk.transpose()));
        out["mean_dir_train"] = std::move(mean_dir);
        return out;
      },
      py::arg("scenario"), py::arg("D") = 2, py::arg("n_train") = 500, py::arg("n_test") = 50,
      py::arg("seed") = 1,
      "draw a named scenario ('iV', 'iVM', 'SvM', 'SvM-c'); returns train/test "
      "Datasets plus the generating record");

  // fitting ---------------------------------------------------------------
  py::class_<FitResult>(m, "FitResult", "posterior draws from one fit")
      .def_property_readonly("K", [](const FitResult& f) { return f.spec.K; })
      .def_property_readonly("D", [](const FitResult& f) { return f.spec.D; })
      .def_property_readonly("N", [](const FitResult& f) { return f.n; })
      .def_property_readonly("chains",
                             [](const FitResult& f) { return static_cast<int>(f.chains.size()); })
      .def_property_readonly("em_objective", [](const FitResult& f) { return f.em_objective; })
      .def_property_readonly("step_size", [](const FitResult& f) { return f.step_size; })
      .def("draws", [](const FitResult& f, int c) { return chain_at(f, c).draws.size(); },
           py::arg("chain"))
      .def("accept_rate",
           [](const FitResult& f, int c) { return chain_at(f, c).hmc_accept_rate; },
           py::arg("chain"))
      .def(
          "nu", [](const FitResult& f, int c) { return stack_vectors(chain_at(f, c), f.spec.K,
                                                                     &ParameterState::nu); },
          py::arg("chain"), "draws x K log-concentration hierarchy means")
      .def(
          "mixing",
          [](const FitResult& f, int c) {
            return stack_vectors(chain_at(f, c), f.spec.K, &ParameterState::lambda);
          },
          py::arg("chain"))
      .def(
          "varphi",
          [](const FitResult& f, int c) {
            return stack_matrices(chain_at(f, c), f.spec.K, f.n,
                                  [](const ParameterState& s) { return s.varphi; });
          },
          py::arg("chain"), "draws x K x N log-concentrations")
      .def(
          "mean_angle",
          [](const FitResult& f, int c) {
            if (f.spec.D != 2) throw ValidationError("mean_angle is only defined for D == 2");
            return stack_matrices(chain_at(f, c), f.spec.K, f.n,
                                  [](const ParameterState& s) { return s.mean_angle; });
          },
          py::arg("chain"), "draws x K x N circular means of the fitted surfaces")
      .def(
          "labels",
          [](const FitResult& f, int c) {
            const PosteriorChain& chain = chain_at(f, c);
            const int n_draws = static_cast<int>(chain.draws.size());
            py::array_t<int> out({n_draws, f.n});
            auto view = out.mutable_unchecked<2>();
            for (int i = 0; i < n_draws; ++i) {
              for (int l = 0; l < f.n; ++l) view(i, l) = chain.draws[i].zeta[l];
            }
            return out;
          },
          py::arg("chain"), "draws x N component assignments");

  m.def("fit", &fit_impl, py::arg("train"), py::arg("K") = 1,
        py::arg("gp_means") = Mat(0, 0), py::arg("sigma") = 0.5, py::arg("omega") = 0.5,
        py::arg("varsigma") = 0.05, py::arg("tau") = 5.0, py::arg("iterations") = 2000,
        py::arg("burn_in") = 1000, py::arg("thin") = 5, py::arg("chains") = 1,
        py::arg("seed") = 1, py::arg("tune") = true, py::arg("target_accept") = 0.75,
        py::arg("step_size") = 0.01, py::arg("leapfrog_steps") = 10, py::arg("em_restarts") = 5,
        py::arg("em_max_iters") = 200, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>(),
        "initialize by regularized EM, then sample the posterior by MCMC");

  m.def(
      "posterior_predictive",
      [](const FitResult& fit, const Dataset& train, const Dataset& held, int replicates,
         std::uint64_t seed) {
        PredictiveReport report;
        {
          py::gil_scoped_release release;
          Rng rng = make_rng(seed);
          report = posterior_predictive(fit.spec, pooled_chain(fit), train, held, replicates, rng);
        }
        py::dict out;
        out["log_predictive"] = report.log_predictive;
        out["per_point_log"] = report.per_point_log;
        out["posterior_draws"] = report.posterior_draws;
        out["predictive_draws"] = report.predictive_draws;
        return out;
      },
      py::arg("fit"), py::arg("train"), py::arg("held"), py::arg("replicates") = 100,
      py::arg("seed") = 1,
      "Monte Carlo log predictive probability of withheld data under a fit");

  // summaries -------------------------------------------------------------
  m.def("circular_mean", &circular_mean, py::arg("angles"));
  m.def("resultant_length", &resultant_length, py::arg("angles"));
  m.def("circular_interval", &circular_interval, py::arg("draws"), py::arg("level"),
        "(low, high) central interval on the circle; may wrap through zero");
  m.def("circular_interval_contains", &circular_interval_contains, py::arg("low"),
        py::arg("high"), py::arg("angle"));
  m.def("chi_square_quantile", &chi_square_quantile, py::arg("level"), py::arg("dof"));
  m.def("rhat", &rhat, py::arg("chains"),
        "split potential scale reduction over equal-length chains");
}
