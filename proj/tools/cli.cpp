#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scusum/scusum.hpp"

namespace scusum::cli {

namespace {

using nlohmann::json;

// Bad flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  sub.add_option("--out", c.out, "Output file (default: standard output)");
  sub.add_option("--config", c.config, "Read options from a key = value file");
}

// Config files hold "key = value" lines (TOML/INI syntax, '#' comments)
// naming the subcommand's long options without the dashes; values may be
// "12,6" or [12, 6] for lists. CLI11 only reads config files at the top
// level, so they are applied here after the command line has been parsed:
// any option already given on the command line keeps its value.
void apply_config(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error("cannot open config file " + path);
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string key = item.fullname();
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = key == "config" ? nullptr : sub.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw UsageError("unknown key '" + item.fullname() + "' in " + path + " for '" +
                       sub.get_name() + "'");
    }
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

void require(const CLI::App& sub, bool present, const std::string& flag) {
  if (!present) throw UsageError(flag + " is required for '" + sub.get_name() + "'");
}

struct ScenarioOpts {
  std::optional<int> nodes;
  std::vector<int> sizes;
  double sigma = 1.0;
  std::string tau = "never";
  std::int64_t horizon = 100;
  std::string convention = "symmetric";
};

void add_scenario(CLI::App& sub, ScenarioOpts& s, bool with_change) {
  sub.add_option("--nodes", s.nodes, "Node count (default: sum of sizes)");
  sub.add_option("--sizes", s.sizes, "Community sizes, comma separated (required)")
      ->delimiter(',');
  sub.add_option("--sigma", s.sigma, "Noise standard deviation")->capture_default_str();
  sub.add_option("--convention", s.convention, "symmetric or iid-full")
      ->check(CLI::IsMember({"symmetric", "iid-full"}))
      ->capture_default_str();
  if (with_change) {
    sub.add_option("--tau", s.tau, "Change point, or 'never'")->capture_default_str();
    sub.add_option("--horizon", s.horizon, "Number of snapshots")->capture_default_str();
  }
}

std::optional<std::int64_t> parse_tau(const std::string& text) {
  if (text == "never") return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 0) {
    throw UsageError("--tau must be a non-negative integer or 'never', got '" + text + "'");
  }
  return v;
}

int node_count(const std::optional<int>& nodes, const std::vector<int>& sizes) {
  const int sum = std::accumulate(sizes.begin(), sizes.end(), 0);
  return nodes.value_or(sum);
}

StreamScenario build_scenario(const ScenarioOpts& o, std::uint64_t seed) {
  if (o.sizes.empty()) throw UsageError("--sizes is required");
  StreamScenario s;
  s.assignment = assignment_from_sizes(o.sizes, node_count(o.nodes, o.sizes));
  s.sigma = o.sigma;
  s.tau = parse_tau(o.tau);
  s.horizon = o.horizon;
  s.seed = seed;
  s.convention = o.convention == "iid-full" ? Convention::kIidFull : Convention::kSymmetric;
  s.validate();
  return s;
}

struct DetectorOpts {
  std::string method = "spectral";
  int m = 1;
  int window = 1;
  std::optional<double> drift;
  double threshold = 1.0;
  std::string scale = "unscaled";
};

void add_detector(CLI::App& sub, DetectorOpts& d, bool with_threshold) {
  sub.add_option("--method", d.method, "exact, spectral or top1")
      ->check(CLI::IsMember({"exact", "spectral", "top1"}))
      ->capture_default_str();
  sub.add_option("--m", d.m, "Subspace dimension")->capture_default_str();
  sub.add_option("--window", d.window, "Window length w")->capture_default_str();
  sub.add_option("--drift", d.drift, "Drift d (default m/2, or 1/2 for top1)");
  sub.add_option("--scale", d.scale, "Exact-CUSUM increment: unscaled or likelihood")
      ->check(CLI::IsMember({"unscaled", "likelihood"}))
      ->capture_default_str();
  if (with_threshold) {
    sub.add_option("--threshold,-b", d.threshold, "Alarm threshold b")->capture_default_str();
  }
}

DetectorConfig build_detector(const DetectorOpts& o, double sigma,
                              std::optional<IndicatorMatrix> A) {
  DetectorConfig c;
  c.method = parse_method(o.method);
  c.m = o.m;
  c.w = o.window;
  c.d = o.drift;
  c.b = o.threshold;
  c.sigma = sigma;
  c.exact_scale = o.scale == "likelihood" ? ExactScale::kLikelihood : ExactScale::kUnscaled;
  if (c.method == Method::kExact) c.A = std::move(A);
  if (c.method != Method::kExact && o.scale == "likelihood") {
    throw UsageError("--scale applies to --method exact only");
  }
  return c;
}

struct McOpts {
  int reps = 1000;
  std::int64_t cap = 10000;
  int workers = 0;
};

void add_mc(CLI::App& sub, McOpts& o) {
  sub.add_option("--reps", o.reps, "Replications per estimate")->capture_default_str();
  sub.add_option("--cap", o.cap, "Max steps per replication")->capture_default_str();
  sub.add_option("--workers", o.workers, "Threads (0: all cores)")->capture_default_str();
}

// Writes to --out when given, otherwise to the fallback stream.
template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  write(file);
  if (!file) throw std::runtime_error("write to " + path + " failed");
}

json optional_number(const std::optional<std::int64_t>& v) {
  return v ? json(*v) : json(nullptr);
}

json estimate_json(const McEstimate& e) {
  return {{"mean", e.mean},       {"se", e.se},
          {"used", e.used},       {"truncated", e.truncated},
          {"censored_mean", e.censored_mean}};
}

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Evaluates f, recording a ValidityError as a null field and a false flag.
template <class F>
json guarded(F&& f, json& flags, const std::string& name) {
  try {
    json v = f();
    flags[name] = true;
    return v;
  } catch (const ValidityError& e) {
    flags[name] = false;
    flags[name + "_reason"] = e.what();
    return nullptr;
  }
}

// ---- subcommands ----

struct SimulateCmd {
  Common common;
  ScenarioOpts scenario;

  int run(std::ostream& out) const {
    const auto stream = make_stream(build_scenario(scenario, common.seed));
    emit(common.out, out, [&](std::ostream& os) { io::write_stream(stream, os); });
    return 0;
  }
};

struct DetectCmd {
  Common common;
  DetectorOpts detector;
  std::string input;
  std::vector<int> sizes;
  double sigma = 1.0;
  std::optional<std::int64_t> horizon;
  std::string report;

  int run(std::ostream& out, std::ostream& err) const {
    const auto stream = io::read_stream(std::filesystem::path(input));
    std::optional<IndicatorMatrix> A;
    if (detector.method == "exact") {
      if (sizes.empty()) throw UsageError("--method exact needs --sizes");
      if (stream.empty()) throw UsageError("--method exact needs a non-empty stream");
      A = build_indicator(assignment_from_sizes(sizes, stream.front().n()));
    } else if (!sizes.empty()) {
      throw UsageError("--sizes only applies to --method exact");
    }
    const DetectorConfig cfg = build_detector(detector, sigma, A);
    const DetectionResult r = run_detector(stream, cfg, horizon);

    emit(common.out, out, [&](std::ostream& os) { io::write_trace_csv(r.trajectory, os); });

    json j{{"method", std::string(to_string(cfg.method))},
           {"alarm", r.stop_time.has_value()},
           {"stop_time", optional_number(r.stop_time)},
           {"stop_index", optional_number(r.stop_index)},
           {"lag", cfg.lag()},
           {"threshold", cfg.b},
           {"drift", cfg.method == Method::kExact ? json(nullptr) : json(cfg.drift())},
           {"snapshots", stream.size()},
           {"scored", r.trajectory.size()},
           {"insufficient_data", r.insufficient_data},
           {"final_statistic",
            r.trajectory.empty() ? json(nullptr) : json(r.trajectory.back().statistic)}};
    // With the trace on standard output the report moves to standard error.
    std::ostream& fallback = common.out.empty() ? err : out;
    emit(report, fallback, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    if (r.insufficient_data) {
      err << "warning: stream shorter than window + 1; nothing was scored\n";
    }
    return 0;
  }
};

McPlan build_plan(const Common& common, const ScenarioOpts& scenario,
                  const DetectorOpts& detector, const McOpts& mc) {
  McPlan plan;
  plan.scenario = build_scenario(scenario, common.seed);
  plan.scenario.tau.reset();
  plan.detector = build_detector(detector, scenario.sigma,
                                 build_indicator(plan.scenario.assignment));
  plan.replications = mc.reps;
  plan.cap = mc.cap;
  plan.master_seed = common.seed;
  plan.workers = mc.workers;
  return plan;
}

struct CalibrateCmd {
  Common common;
  ScenarioOpts scenario;
  DetectorOpts detector;
  McOpts mc;
  double gamma = 100.0;
  double rel_tol = 0.05;

  int run(std::ostream& out) const {
    const McPlan plan = build_plan(common, scenario, detector, mc);
    const CalibrationResult r = calibrate_threshold(plan, gamma, rel_tol);
    json j{{"method", std::string(to_string(plan.detector.method))},
           {"target_arl", gamma},
           {"rel_tol", rel_tol},
           {"b", r.b},
           {"probe_arl", r.probe_arl},
           {"probes", r.probes},
           {"arl_floor", r.arl_floor},
           {"confirmation", r.confirmation ? estimate_json(*r.confirmation) : json(nullptr)}};
    emit(common.out, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    return 0;
  }
};

struct BenchCmd {
  Common common;
  ScenarioOpts scenario;
  DetectorOpts detector;
  McOpts mc;
  std::vector<double> gammas{100.0};
  double rel_tol = 0.05;

  int run(std::ostream& out, std::ostream& err) const {
    McPlan plan = build_plan(common, scenario, detector, mc);
    const std::vector<OcRow> rows = oc_curve(plan, gammas, rel_tol);
    emit(common.out, out, [&](std::ostream& os) { io::write_oc_csv(rows, os); });

    json table = json::array();
    for (const auto& row : rows) {
      table.push_back({{"gamma", row.gamma},
                       {"b", row.b},
                       {"edd", row.edd},
                       {"se", row.se},
                       {"arl_floor", row.arl_floor},
                       {"arl", row.arl ? estimate_json(*row.arl) : json(nullptr)}});
    }
    json j{{"method", std::string(to_string(plan.detector.method))},
           {"replications", plan.replications},
           {"cap", plan.cap},
           {"seed", plan.master_seed},
           {"rows", std::move(table)}};
    std::ostream& fallback = common.out.empty() ? err : out;
    fallback << j.dump(2) << '\n';
    return 0;
  }
};

struct TheoryCmd {
  Common common;
  std::vector<int> sizes;
  std::vector<double> eigenvalues;
  double sigma = 1.0;
  double gamma = 1000.0;
  std::optional<double> window;
  std::optional<int> nodes;

  int run(std::ostream& out) const {
    if (sizes.empty() == eigenvalues.empty()) {
      throw UsageError("give exactly one of --sizes and --eigenvalues");
    }
    if (!(sigma > 0.0)) throw UsageError("--sigma must be > 0");
    const theory::Spectrum spectrum =
        sizes.empty() ? theory::make_spectrum(eigenvalues) : theory::spectrum_from_sizes(sizes);
    const int m = spectrum.m();
    const int n = sizes.empty() ? nodes.value_or(m) : node_count(nodes, sizes);

    // C and w* are required for everything downstream.
    const Matrix M = theory::pairwise_M(spectrum);
    const double C = theory::window_constant_C(M);
    const double w_star = theory::optimal_window(gamma, m, C, sigma);
    const double w = window.value_or(w_star);

    json flags = json::object();
    std::optional<IndicatorMatrix> A;
    if (!sizes.empty()) A = build_indicator(assignment_from_sizes(sizes, n));

    json j;
    j["lambda"] = spectrum.eigenvalues;
    j["m"] = m;
    j["n"] = n;
    j["sigma"] = sigma;
    j["gamma"] = gamma;
    j["M"] = matrix_json(M);
    j["C"] = C;
    j["C_bound"] = theory::window_constant_C_bound(M);
    j["w_star"] = w_star;
    j["window"] = w;
    j["drift_post"] = theory::expected_drift_post(m, C, w);
    j["delta_star"] = guarded([&] { return json(theory::delta_star(m, C, w, sigma)); }, flags,
                              "delta_star");
    j["d_star"] = guarded([&] { return json(theory::optimal_drift(w, m, C, sigma)); }, flags,
                          "d_star");
    j["I0"] = A ? json(theory::kl_info(*A, sigma)) : json(nullptr);
    j["edd_exact"] = A ? guarded([&] { return json(theory::edd_exact_approx(gamma, *A, sigma)); },
                                 flags, "edd_exact")
                       : json(nullptr);
    j["edd_spectral"] = guarded(
        [&] { return json(theory::edd_spectral_optimal_delta(gamma, m, C, w, sigma)); }, flags,
        "edd_spectral");
    j["ratio"] = guarded(
        [&] { return json(theory::optimality_ratio(gamma, m, C, n, sigma)); }, flags, "ratio");
    j["valid"] = flags;
    emit(common.out, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    return 0;
  }
};

struct XcorrCmd {
  Common common;
  std::string input;
  int segment = 100;

  int run(std::ostream& out, std::ostream& err) const {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open " + input);
    const io::MultichannelSeries series = io::read_sensor_csv(in);
    const io::XcorrResult r = io::xcorr_stream(series, segment);
    if (r.zero_variance_channels > 0) {
      err << "warning: " << r.zero_variance_channels
          << " zero-variance (segment, channel) pairs set to correlation 0\n";
    }
    emit(common.out, out, [&](std::ostream& os) { io::write_stream(r.stream, os); });
    return 0;
  }
};

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral CUSUM detection of emerging communities in dynamic graphs", "scusum"};
  app.require_subcommand(1);

  SimulateCmd simulate;
  auto* sim = app.add_subcommand("simulate", "Generate a snapshot stream (NDJSON)");
  add_common(*sim, simulate.common);
  add_scenario(*sim, simulate.scenario, true);

  DetectCmd detect;
  auto* det = app.add_subcommand("detect", "Run a detector over a stream");
  add_common(*det, detect.common);
  add_detector(*det, detect.detector, true);
  det->add_option("--in", detect.input, "NDJSON stream (required)");
  det->add_option("--sizes", detect.sizes, "Community sizes for --method exact")->delimiter(',');
  det->add_option("--sigma", detect.sigma, "Noise level for --scale likelihood")
      ->capture_default_str();
  det->add_option("--horizon", detect.horizon, "Score at most this many snapshots");
  det->add_option("--report", detect.report, "Alarm report JSON file");

  CalibrateCmd calibrate;
  auto* cal = app.add_subcommand("calibrate", "Find the threshold b for a target ARL");
  add_common(*cal, calibrate.common);
  add_scenario(*cal, calibrate.scenario, false);
  add_detector(*cal, calibrate.detector, false);
  add_mc(*cal, calibrate.mc);
  cal->add_option("--gamma", calibrate.gamma, "Target ARL")->capture_default_str();
  cal->add_option("--rel-tol", calibrate.rel_tol, "Relative ARL tolerance")
      ->capture_default_str();

  TheoryCmd theory_cmd;
  auto* th = app.add_subcommand("theory", "Closed-form design report (JSON)");
  add_common(*th, theory_cmd.common);
  th->add_option("--sizes", theory_cmd.sizes, "Community sizes")->delimiter(',');
  th->add_option("--eigenvalues", theory_cmd.eigenvalues, "Nonzero eigenvalues of the mean")
      ->delimiter(',');
  th->add_option("--sigma", theory_cmd.sigma, "Noise level")->capture_default_str();
  th->add_option("--gamma", theory_cmd.gamma, "ARL level")->capture_default_str();
  th->add_option("--window", theory_cmd.window, "Window length (default w*)");
  th->add_option("--nodes", theory_cmd.nodes, "Node count n (default: sum of sizes)");

  BenchCmd bench;
  auto* be = app.add_subcommand("bench", "Operating-characteristic curve (CSV)");
  add_common(*be, bench.common);
  add_scenario(*be, bench.scenario, false);
  add_detector(*be, bench.detector, false);
  add_mc(*be, bench.mc);
  be->add_option("--gammas", bench.gammas, "Ascending ARL levels")
      ->delimiter(',')
      ->capture_default_str();
  be->add_option("--rel-tol", bench.rel_tol, "Relative ARL tolerance")->capture_default_str();

  XcorrCmd xcorr;
  auto* xc = app.add_subcommand("xcorr", "Sensor CSV to correlation-graph stream");
  add_common(*xc, xcorr.common);
  xc->add_option("--in", xcorr.input, "Sensor CSV (required)");
  xc->add_option("--segment", xcorr.segment, "Segment length L")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim) {
      apply_config(*sim, simulate.common.config);
      return simulate.run(out);
    }
    if (*det) {
      apply_config(*det, detect.common.config);
      require(*det, !detect.input.empty(), "--in");
      return detect.run(out, err);
    }
    if (*cal) {
      apply_config(*cal, calibrate.common.config);
      return calibrate.run(out);
    }
    if (*th) {
      apply_config(*th, theory_cmd.common.config);
      return theory_cmd.run(out);
    }
    if (*be) {
      apply_config(*be, bench.common.config);
      return bench.run(out, err);
    }
    if (*xc) {
      apply_config(*xc, xcorr.common.config);
      require(*xc, !xcorr.input.empty(), "--in");
      return xcorr.run(out, err);
    }
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidityError& e) {
    err << "outside validity domain: " << e.what() << '\n';
    return kExitValidity;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace scusum::cli
