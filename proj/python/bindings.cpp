#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scusum/scusum.hpp"

namespace py = pybind11;
using namespace scusum;

namespace {

DetectorConfig make_detector(const std::string& method, int m, int w, double b,
                             std::optional<double> d, double sigma,
                             const std::string& scale) {
  DetectorConfig c;
  c.method = parse_method(method);
  c.m = m;
  c.w = w;
  c.b = b;
  c.d = d;
  c.sigma = sigma;
  if (scale == "likelihood") {
    c.exact_scale = ExactScale::kLikelihood;
  } else if (scale != "unscaled") {
    throw std::invalid_argument("scale must be 'unscaled' or 'likelihood'");
  }
  return c;
}

Convention parse_convention(const std::string& name) {
  if (name == "symmetric") return Convention::kSymmetric;
  if (name == "iid-full") return Convention::kIidFull;
  throw std::invalid_argument("convention must be 'symmetric' or 'iid-full'");
}

McPlan make_plan(const std::vector<int>& sizes, std::optional<int> n, double sigma,
                 const std::string& method, int m, int w, double b, std::optional<double> d,
                 const std::string& scale, int replications, std::int64_t cap,
                 std::uint64_t seed, int workers) {
  int total = 0;
  for (int s : sizes) total += s;
  McPlan plan;
  plan.scenario.assignment = assignment_from_sizes(sizes, n.value_or(total));
  plan.scenario.sigma = sigma;
  plan.detector = make_detector(method, m, w, b, d, sigma, scale);
  plan.replications = replications;
  plan.cap = cap;
  plan.master_seed = seed;
  plan.workers = workers;
  return plan;
}

py::dict estimate_dict(const McEstimate& e) {
  py::dict out;
  out["mean"] = e.mean;
  out["se"] = e.se;
  out["used"] = e.used;
  out["truncated"] = e.truncated;
  out["censored_mean"] = e.censored_mean;
  return out;
}

std::vector<GraphSnapshot> to_stream(const std::vector<Matrix>& weights,
                                     const std::string& convention) {
  std::vector<GraphSnapshot> stream;
  stream.reserve(weights.size());
  std::int64_t t = 0;
  for (const auto& w : weights) stream.push_back({++t, w, parse_convention(convention)});
  return stream;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Spectral CUSUM detection of emerging communities in Gaussian-weighted graphs.";

  py::register_exception<ValidityError>(mod, "ValidityError", PyExc_ValueError);

  mod.def(
      "indicator",
      [](const std::vector<int>& labels, int m) {
        const auto A = build_indicator(CommunityAssignment{m, labels});
        return py::make_tuple(A.entries, A.sizes);
      },
      py::arg("labels"), py::arg("m"),
      "One-hot indicator matrix from per-node labels (0 = background). Returns (A, sizes).");
  mod.def(
      "mean_matrix",
      [](const std::vector<int>& sizes, int n) {
        return mean_matrix(build_indicator(assignment_from_sizes(sizes, n)));
      },
      py::arg("sizes"), py::arg("n"), "Post-change mean AA^T for contiguous communities.");

  mod.def(
      "simulate",
      [](const std::vector<int>& sizes, int n, double sigma, std::optional<std::int64_t> tau,
         std::int64_t horizon, std::uint64_t seed, const std::string& convention) {
        StreamScenario s;
        s.assignment = assignment_from_sizes(sizes, n);
        s.sigma = sigma;
        s.tau = tau;
        s.horizon = horizon;
        s.seed = seed;
        s.convention = parse_convention(convention);
        std::vector<Matrix> out;
        for (auto& g : make_stream(s)) out.push_back(std::move(g.weights));
        return out;
      },
      py::arg("sizes"), py::arg("n"), py::arg("sigma") = 1.0, py::arg("tau") = py::none(),
      py::arg("horizon") = 100, py::arg("seed") = 0, py::arg("convention") = "symmetric",
      "Snapshots 1..horizon; the mean switches to AA^T after tau (None: never).");

  mod.def(
      "top_m_eigs",
      [](const Matrix& M, int m) {
        const auto est = top_m_eigs(M, m);
        return py::make_tuple(est.eigenvalues, est.eigenvectors);
      },
      py::arg("M"), py::arg("m"), "Top-m eigenpairs, descending, deterministic signs.");

  mod.def(
      "run_detector",
      [](const std::vector<Matrix>& stream, const std::string& method, int m, int w, double b,
         std::optional<double> d, std::optional<std::vector<int>> sizes, double sigma,
         const std::string& scale, const std::string& convention) {
        auto cfg = make_detector(method, m, w, b, d, sigma, scale);
        const auto snaps = to_stream(stream, convention);
        if (cfg.method == Method::kExact) {
          if (!sizes) throw std::invalid_argument("method 'exact' needs sizes");
          if (snaps.empty()) throw std::invalid_argument("empty stream");
          cfg.A = build_indicator(assignment_from_sizes(*sizes, snaps.front().n()));
        }
        const auto r = run_detector(snaps, cfg);
        std::vector<std::int64_t> t;
        std::vector<double> stat, inc;
        for (const auto& p : r.trajectory) {
          t.push_back(p.t);
          stat.push_back(p.statistic);
          inc.push_back(p.increment);
        }
        py::dict out;
        out["stop_time"] = r.stop_time;
        out["stop_index"] = r.stop_index;
        out["t"] = t;
        out["statistic"] = stat;
        out["increment"] = inc;
        out["insufficient_data"] = r.insufficient_data;
        return out;
      },
      py::arg("stream"), py::arg("method") = "spectral", py::arg("m") = 1, py::arg("w") = 1,
      py::arg("b") = 1.0, py::arg("d") = py::none(), py::arg("sizes") = py::none(),
      py::arg("sigma") = 1.0, py::arg("scale") = "unscaled",
      py::arg("convention") = "symmetric");

  mod.def(
      "estimate_arl",
      [](const std::vector<int>& sizes, std::optional<int> n, double sigma,
         const std::string& method, int m, int w, double b, std::optional<double> d,
         const std::string& scale, int replications, std::int64_t cap, std::uint64_t seed,
         int workers) {
        McPlan plan = make_plan(sizes, n, sigma, method, m, w, b, d, scale, replications, cap,
                                seed, workers);
        McEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_arl(plan);
        }
        return estimate_dict(e);
      },
      py::arg("sizes"), py::arg("n") = py::none(), py::arg("sigma") = 1.0,
      py::arg("method") = "spectral", py::arg("m") = 1, py::arg("w") = 1, py::arg("b") = 1.0,
      py::arg("d") = py::none(), py::arg("scale") = "unscaled", py::arg("replications") = 1000,
      py::arg("cap") = 10000, py::arg("seed") = 0, py::arg("workers") = 0);

  mod.def(
      "estimate_edd",
      [](const std::vector<int>& sizes, std::optional<int> n, double sigma,
         const std::string& method, int m, int w, double b, std::optional<double> d,
         const std::string& scale, int replications, std::int64_t cap, std::uint64_t seed,
         int workers) {
        McPlan plan = make_plan(sizes, n, sigma, method, m, w, b, d, scale, replications, cap,
                                seed, workers);
        plan.scenario.tau = 0;
        McEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_edd(plan);
        }
        return estimate_dict(e);
      },
      py::arg("sizes"), py::arg("n") = py::none(), py::arg("sigma") = 1.0,
      py::arg("method") = "spectral", py::arg("m") = 1, py::arg("w") = 1, py::arg("b") = 1.0,
      py::arg("d") = py::none(), py::arg("scale") = "unscaled", py::arg("replications") = 1000,
      py::arg("cap") = 10000, py::arg("seed") = 0, py::arg("workers") = 0);

  mod.def(
      "calibrate",
      [](double gamma, const std::vector<int>& sizes, std::optional<int> n, double sigma,
         const std::string& method, int m, int w, std::optional<double> d,
         const std::string& scale, double rel_tol, int replications, std::int64_t cap,
         std::uint64_t seed, int workers) {
        McPlan plan = make_plan(sizes, n, sigma, method, m, w, 1.0, d, scale, replications, cap,
                                seed, workers);
        CalibrationResult r;
        {
          py::gil_scoped_release release;
          r = calibrate_threshold(plan, gamma, rel_tol);
        }
        py::dict out;
        out["b"] = r.b;
        out["probe_arl"] = r.probe_arl;
        out["probes"] = r.probes;
        out["arl_floor"] = r.arl_floor;
        out["confirmation"] = r.confirmation ? py::object(estimate_dict(*r.confirmation))
                                             : py::object(py::none());
        return out;
      },
      py::arg("gamma"), py::arg("sizes"), py::arg("n") = py::none(), py::arg("sigma") = 1.0,
      py::arg("method") = "spectral", py::arg("m") = 1, py::arg("w") = 1,
      py::arg("d") = py::none(), py::arg("scale") = "unscaled", py::arg("rel_tol") = 0.05,
      py::arg("replications") = 1000, py::arg("cap") = 10000, py::arg("seed") = 0,
      py::arg("workers") = 0, "Threshold b whose ARL matches gamma within rel_tol.");

  auto th = mod.def_submodule("theory", "Closed-form design formulas.");
  th.def(
      "pairwise_M",
      [](std::vector<double> eigenvalues) {
        return theory::pairwise_M(theory::make_spectrum(std::move(eigenvalues)));
      },
      py::arg("eigenvalues"));
  th.def(
      "constant_C",
      [](std::vector<double> eigenvalues) {
        return theory::window_constant_C(
            theory::pairwise_M(theory::make_spectrum(std::move(eigenvalues))));
      },
      py::arg("eigenvalues"));
  th.def("expected_drift_post", &theory::expected_drift_post, py::arg("m"), py::arg("C"),
         py::arg("w"));
  th.def("drift_for_delta", &theory::drift_for_delta, py::arg("delta"), py::arg("sigma"),
         py::arg("m"));
  th.def("equalizer_mgf", &theory::equalizer_mgf, py::arg("delta"), py::arg("d"),
         py::arg("sigma"), py::arg("m"));
  th.def("delta_star", &theory::delta_star, py::arg("m"), py::arg("C"), py::arg("w"),
         py::arg("sigma"));
  th.def("edd_spectral", &theory::edd_spectral_approx, py::arg("gamma"), py::arg("delta"),
         py::arg("m"), py::arg("C"), py::arg("w"), py::arg("sigma"));
  th.def(
      "edd_exact",
      [](double gamma, const std::vector<int>& sizes, double sigma) {
        int n = 0;
        for (int s : sizes) n += s;
        return theory::edd_exact_approx(gamma, build_indicator(assignment_from_sizes(sizes, n)),
                                        sigma);
      },
      py::arg("gamma"), py::arg("sizes"), py::arg("sigma"));
  th.def("optimal_window", &theory::optimal_window, py::arg("gamma"), py::arg("m"),
         py::arg("C"), py::arg("sigma"));
  th.def("optimal_drift", &theory::optimal_drift, py::arg("w_star"), py::arg("m"),
         py::arg("C"), py::arg("sigma"));
  th.def("optimality_ratio", &theory::optimality_ratio, py::arg("gamma"), py::arg("m"),
         py::arg("C"), py::arg("n"), py::arg("sigma"));
}
