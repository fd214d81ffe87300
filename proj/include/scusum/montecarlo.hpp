#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "scusum/detect.hpp"
#include "scusum/errors.hpp"
#include "scusum/graph_model.hpp"

namespace scusum {

// Runs body(0..count-1) on up to `workers` threads (0: hardware concurrency).
// Each index must write only its own output slot; the first exception thrown
// by any task is rethrown after all threads join.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body);

/// Replication i draws its stream from derive_seed(master_seed, i), so
/// results do not depend on the worker count. For the exact method the
/// indicator matrix defaults to the scenario's assignment.
struct McPlan {
  StreamScenario scenario;
  DetectorConfig detector;
  int replications = 1000;
  std::int64_t cap = 10000;  // max wall-clock steps per replication
  std::uint64_t master_seed = 0;
  int workers = 0;
};

struct McEstimate {
  double mean = 0.0;    // over replications that alarmed before the cap
  double se = 0.0;      // sample std / sqrt(used)
  int used = 0;
  int truncated = 0;    // replications that hit the cap
  double censored_mean = 0.0;  // capped runs counted at the cap; a lower bound

  double truncated_fraction() const {
    const int total = used + truncated;
    return total == 0 ? 0.0 : static_cast<double>(truncated) / total;
  }
};

// Wall-clock alarm time of every replication, nullopt when capped.
std::vector<std::optional<std::int64_t>> simulate_run_lengths(const McPlan& plan);

McEstimate summarize_run_lengths(std::span<const std::optional<std::int64_t>> runs,
                                 std::int64_t cap);

// Requires scenario.tau == nullopt.
McEstimate estimate_arl(const McPlan& plan);
// Requires scenario.tau == 0.
McEstimate estimate_edd(const McPlan& plan);

struct CalibrationOptions {
  // Smallest threshold probed, as a fraction of the warm start log(gamma).
  double min_threshold_ratio = 1e-3;
  int max_probes = 60;
};

struct CalibrationResult {
  double b = 0.0;
  // Censored ARL of the accepted probe (calibration seeds).
  double probe_arl = 0.0;
  // Double-budget run on fresh seeds; empty when arl_floor is set.
  std::optional<McEstimate> confirmation;
  // Every replication outlived the cap even at the smallest probed b, i.e.
  // the detector's false-alarm rate is already below 1/target at any b > 0.
  bool arl_floor = false;
  int probes = 0;
};

/// Bisection on b over the paired-seed ARL curve, warm-started at log(gamma).
/// The scenario's change point is ignored (runs are pre-change). Requires
/// target_gamma >= 10, rel_tol in (0, 0.5) and cap >= 10 target_gamma.
CalibrationResult calibrate_threshold(const McPlan& plan, double target_gamma,
                                      double rel_tol,
                                      const CalibrationOptions& options = {});

struct OcRow {
  double gamma = 0.0;
  double b = 0.0;
  double edd = 0.0;
  double se = 0.0;
  bool arl_floor = false;
  std::optional<McEstimate> arl;
};

// Calibrate at each gamma (ascending), then estimate EDD with tau = 0.
std::vector<OcRow> oc_curve(const McPlan& plan, std::span<const double> gammas,
                            double rel_tol = 0.05);

struct DriftEstimate {
  double pre_mean = 0.0;
  double pre_se = 0.0;
  double post_mean = 0.0;
  double post_se = 0.0;
};

/// Mean of tr(G Â Â^T) with Â from w fresh snapshots drawn after G, under
/// zero mean (pre) and mean AA^T (post). Replication i uses seeds derived
/// from (scenario.seed, i), so runs with different w are paired.
DriftEstimate estimate_drift_mc(const StreamScenario& scenario, int m, int w,
                                int replications, int workers = 0);

/// Monte Carlo mean of exp(delta (tr(G Â Â^T) - d)) under the pre-change
/// model with iid-full sampling and d = drift_for_delta(delta, sigma, m).
/// Refuses (ValidityError) when delta sigma sqrt(2m) > 1, where the estimator
/// variance blows up. delta == 0 returns exactly 1.
double verify_equalizer_mc(int n, int m, int w, double sigma, double delta,
                           int replications, std::uint64_t seed = 0,
                           int workers = 0);

}  // namespace scusum
