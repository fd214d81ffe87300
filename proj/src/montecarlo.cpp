#include "scusum/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "scusum/spectral.hpp"
#include "scusum/theory.hpp"

namespace scusum {

namespace {

constexpr std::uint64_t kConfirmSalt = 0x636f6e6669726dULL;
constexpr std::uint64_t kEddSalt = 0x656464ULL;

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Two-pass mean and standard error, summed in index order.
MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    out.se = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return out;
}

DetectorConfig resolve_detector(const McPlan& plan) {
  DetectorConfig cfg = plan.detector;
  if (cfg.method == Method::kExact && !cfg.A) {
    cfg.A = build_indicator(plan.scenario.assignment);
  }
  cfg.validate();
  return cfg;
}

std::optional<std::int64_t> run_one(const StreamScenario& scenario,
                                    const DetectorConfig& cfg,
                                    std::uint64_t seed, std::int64_t cap) {
  StreamGenerator gen(scenario, seed);
  Detector detector(cfg);
  while (gen.time() < cap) {
    detector.observe(gen.next());
    if (detector.stopped()) return detector.stop_time();
  }
  return std::nullopt;
}

}  // namespace

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  unsigned threads = workers > 0 ? static_cast<unsigned>(workers)
                                 : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::optional<std::int64_t>> simulate_run_lengths(const McPlan& plan) {
  if (plan.replications < 1) throw std::invalid_argument("zero replications");
  if (plan.cap < 1) throw std::invalid_argument("cap must be >= 1");
  plan.scenario.assignment.validate();
  const DetectorConfig cfg = resolve_detector(plan);
  std::vector<std::optional<std::int64_t>> runs(
      static_cast<std::size_t>(plan.replications));
  parallel_for(runs.size(), plan.workers, [&](std::size_t i) {
    runs[i] = run_one(plan.scenario, cfg, derive_seed(plan.master_seed, i), plan.cap);
  });
  return runs;
}

McEstimate summarize_run_lengths(std::span<const std::optional<std::int64_t>> runs,
                                 std::int64_t cap) {
  McEstimate est;
  std::vector<double> alarmed;
  alarmed.reserve(runs.size());
  double censored = 0.0;
  for (const auto& r : runs) {
    if (r) {
      alarmed.push_back(static_cast<double>(*r));
      censored += static_cast<double>(*r);
    } else {
      ++est.truncated;
      censored += static_cast<double>(cap);
    }
  }
  const MeanSe ms = mean_se(alarmed);
  est.mean = alarmed.empty() ? NAN : ms.mean;
  est.se = alarmed.empty() ? NAN : ms.se;
  est.used = static_cast<int>(alarmed.size());
  est.censored_mean = runs.empty() ? 0.0 : censored / static_cast<double>(runs.size());
  return est;
}

McEstimate estimate_arl(const McPlan& plan) {
  if (plan.scenario.tau) {
    throw std::invalid_argument("ARL estimation needs a stream with no change (tau = never)");
  }
  return summarize_run_lengths(simulate_run_lengths(plan), plan.cap);
}

McEstimate estimate_edd(const McPlan& plan) {
  if (!plan.scenario.tau || *plan.scenario.tau != 0) {
    throw std::invalid_argument("EDD estimation needs a change at the start (tau = 0)");
  }
  return summarize_run_lengths(simulate_run_lengths(plan), plan.cap);
}

CalibrationResult calibrate_threshold(const McPlan& plan, double target_gamma,
                                      double rel_tol,
                                      const CalibrationOptions& options) {
  if (!(target_gamma >= 10.0)) throw std::invalid_argument("target ARL must be >= 10");
  if (!(rel_tol > 0.0 && rel_tol < 0.5)) {
    throw std::invalid_argument("relative tolerance must lie in (0, 0.5)");
  }
  if (static_cast<double>(plan.cap) < 10.0 * target_gamma) {
    throw ValidityError("cap " + std::to_string(plan.cap) +
                        " too small to observe target ARL " + std::to_string(target_gamma) +
                        " (need cap >= 10 x target)");
  }

  McPlan probe_plan = plan;
  probe_plan.scenario.tau.reset();
  CalibrationResult result;

  // Censored ARL on the calibration seeds; monotone in b per replication.
  auto probe = [&](double b) {
    if (result.probes >= options.max_probes) {
      throw ValidityError("threshold calibration did not converge within " +
                          std::to_string(options.max_probes) + " probes");
    }
    ++result.probes;
    probe_plan.detector.b = b;
    return estimate_arl(probe_plan).censored_mean;
  };
  const double lo_band = target_gamma * (1.0 - rel_tol);
  const double hi_band = target_gamma * (1.0 + rel_tol);
  auto accept = [&](double b, double arl) {
    result.b = b;
    result.probe_arl = arl;
    McPlan confirm = probe_plan;
    confirm.detector.b = b;
    confirm.replications = 2 * plan.replications;
    confirm.master_seed = splitmix64(plan.master_seed ^ kConfirmSalt);
    result.confirmation = estimate_arl(confirm);
    return result;
  };

  const double b0 = std::log(target_gamma);
  double arl0 = probe(b0);
  if (arl0 >= lo_band && arl0 <= hi_band) return accept(b0, arl0);

  double lo = 0.0, hi = 0.0;
  if (arl0 < lo_band) {
    lo = b0;
    hi = 2.0 * b0;
    for (;;) {
      const double arl = probe(hi);
      if (arl >= lo_band && arl <= hi_band) return accept(hi, arl);
      if (arl > hi_band) break;
      lo = hi;
      hi *= 2.0;
    }
  } else {
    hi = b0;
    lo = b0 * options.min_threshold_ratio;
    const double arl = probe(lo);
    if (arl >= lo_band && arl <= hi_band) return accept(lo, arl);
    if (arl > hi_band) {
      result.b = lo;
      result.probe_arl = arl;
      result.arl_floor = true;
      return result;
    }
  }
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    const double arl = probe(mid);
    if (arl >= lo_band && arl <= hi_band) return accept(mid, arl);
    if (arl < lo_band) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * hi) {
      throw ValidityError("ARL jumps across the tolerance band near b = " +
                          std::to_string(mid) + "; increase replications or rel_tol");
    }
  }
}

std::vector<OcRow> oc_curve(const McPlan& plan, std::span<const double> gammas,
                            double rel_tol) {
  if (!std::is_sorted(gammas.begin(), gammas.end())) {
    throw std::invalid_argument("gamma list must be ascending");
  }
  std::vector<OcRow> rows;
  for (double gamma : gammas) {
    const CalibrationResult cal = calibrate_threshold(plan, gamma, rel_tol);
    McPlan edd_plan = plan;
    edd_plan.scenario.tau = 0;
    edd_plan.detector.b = cal.b;
    edd_plan.master_seed = splitmix64(plan.master_seed ^ kEddSalt);
    const McEstimate edd = estimate_edd(edd_plan);
    rows.push_back(OcRow{gamma, cal.b, edd.mean, edd.se, cal.arl_floor, cal.confirmation});
  }
  return rows;
}

DriftEstimate estimate_drift_mc(const StreamScenario& scenario, int m, int w,
                                int replications, int workers) {
  if (replications < 1) throw std::invalid_argument("zero replications");
  if (w < 1) throw std::invalid_argument("window length must be >= 1");
  const IndicatorMatrix A = build_indicator(scenario.assignment);
  if (m < 1 || m > A.n()) throw std::invalid_argument("subspace dimension out of range");
  if (!(scenario.sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  const Matrix post_mean = mean_matrix(A);
  const Matrix pre_mean = Matrix::Zero(A.n(), A.n());

  auto draw = [&](const Matrix& mean, std::uint64_t seed) {
    Rng rng(seed);
    const GraphSnapshot g = sample_snapshot(mean, scenario.sigma, scenario.convention, rng, 0);
    WindowBuffer window(w);
    for (int k = 1; k <= w; ++k) {
      window.push(sample_snapshot(mean, scenario.sigma, scenario.convention, rng, k));
    }
    const Matrix P = projector(estimate_subspace(window, m));
    return spectral_increment(g.weights, P, 0.0);
  };

  std::vector<double> pre(static_cast<std::size_t>(replications));
  std::vector<double> post(pre.size());
  parallel_for(pre.size(), workers, [&](std::size_t i) {
    pre[i] = draw(pre_mean, derive_seed(scenario.seed, 2 * i));
    post[i] = draw(post_mean, derive_seed(scenario.seed, 2 * i + 1));
  });
  const MeanSe a = mean_se(pre);
  const MeanSe b = mean_se(post);
  return DriftEstimate{a.mean, a.se, b.mean, b.se};
}

double verify_equalizer_mc(int n, int m, int w, double sigma, double delta,
                           int replications, std::uint64_t seed, int workers) {
  if (replications < 1) throw std::invalid_argument("zero replications");
  if (n < 1 || m < 1 || m > n) throw std::invalid_argument("need 1 <= m <= n");
  if (w < 1) throw std::invalid_argument("window length must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
  if (delta * sigma * std::sqrt(2.0 * m) > 1.0) {
    throw ValidityError("refusing equalizer check: delta sigma sqrt(2m) = " +
                        std::to_string(delta * sigma * std::sqrt(2.0 * m)) +
                        " > 1 makes the exponential-moment estimate unstable");
  }
  if (delta == 0.0) return 1.0;
  const double d = theory::drift_for_delta(delta, sigma, m);
  const Matrix zero = Matrix::Zero(n, n);

  std::vector<double> values(static_cast<std::size_t>(replications));
  parallel_for(values.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const GraphSnapshot g = sample_snapshot(zero, sigma, Convention::kIidFull, rng, 0);
    WindowBuffer window(w);
    for (int k = 1; k <= w; ++k) {
      window.push(sample_snapshot(zero, sigma, Convention::kIidFull, rng, k));
    }
    const Matrix P = projector(estimate_subspace(window, m));
    values[i] = std::exp(delta * spectral_increment(g.weights, P, d));
  });
  return mean_se(values).mean;
}

}  // namespace scusum
