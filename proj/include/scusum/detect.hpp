#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "scusum/graph_model.hpp"
#include "scusum/spectral.hpp"

namespace scusum {

enum class Method { kExact, kSpectral, kTop1 };

// Scale of the exact-variant increment. kUnscaled is 2 tr(G AA^T) -
// tr(AA^T AA^T); kLikelihood divides that by 2 sigma^2, giving the true
// log-likelihood ratio (threshold b ~ log ARL).
enum class ExactScale { kUnscaled, kLikelihood };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct DetectorConfig {
  Method method = Method::kSpectral;
  int m = 1;                 // subspace dimension (spectral)
  int w = 1;                 // window length (spectral, top1)
  std::optional<double> d;   // drift (spectral, top1); default m/2
  double b = 1.0;            // threshold
  double sigma = 1.0;        // only used by ExactScale::kLikelihood
  std::optional<IndicatorMatrix> A;  // exact only
  ExactScale exact_scale = ExactScale::kUnscaled;

  // Midpoint of the admissible drift interval (0, m); top1 uses m = 1.
  double drift() const;
  // Snapshots between a scored index and the wall-clock alarm.
  int lag() const { return method == Method::kExact ? 0 : w; }
  void validate() const;
};

double log_likelihood_ratio(const Matrix& G, const IndicatorMatrix& A,
                            double sigma);
double exact_increment(const Matrix& G, const IndicatorMatrix& A);
double spectral_increment(const Matrix& G, const Matrix& P, double d);
double top1_increment(const Matrix& G, const Vector& v, double d);

inline double cusum_update(double prev, double increment) {
  return (prev > 0.0 ? prev : 0.0) + increment;
}

// Brute force max_{1<=k<=t} sum_{i=k}^t inc_i for every t. O(t^3); oracle use.
std::vector<double> cusum_maxform(std::span<const double> increments);
// Same sequence via the clamped recursion with S_0 = 0.
std::vector<double> cusum_recursive(std::span<const double> increments);

struct TracePoint {
  std::int64_t t = 0;  // index of the scored snapshot
  double statistic = 0.0;
  double increment = 0.0;
  bool alarmed = false;
};

/// Online CUSUM detector. Exact scores each snapshot on arrival; spectral and
/// top1 score snapshot t once t+1..t+w have arrived, using the subspace of
/// that future window, so the wall-clock alarm is the scored index plus w.
class Detector {
 public:
  explicit Detector(DetectorConfig config);

  // Returns the scored step if this snapshot completed one. Snapshots fed
  // after the alarm are ignored.
  std::optional<TracePoint> observe(const GraphSnapshot& snapshot);

  bool stopped() const { return stop_index_.has_value(); }
  std::optional<std::int64_t> stop_index() const { return stop_index_; }
  std::optional<std::int64_t> stop_time() const;
  double statistic() const { return statistic_; }
  std::int64_t last_scored() const { return last_scored_; }
  const DetectorConfig& config() const { return config_; }

 private:
  double increment_for(const Matrix& G, const WindowBuffer& window) const;

  DetectorConfig config_;
  double drift_ = 0.0;
  Matrix exact_mean_;
  double exact_offset_ = 0.0;
  double exact_factor_ = 1.0;
  std::deque<GraphSnapshot> pending_;
  double statistic_ = 0.0;
  std::int64_t last_scored_ = 0;
  std::optional<std::int64_t> stop_index_;
};

struct DetectionResult {
  std::optional<std::int64_t> stop_time;   // wall-clock alarm
  std::optional<std::int64_t> stop_index;  // scored index of the alarm
  std::vector<TracePoint> trajectory;
  DetectorConfig config;
  bool insufficient_data = false;  // fewer than w+1 snapshots
};

DetectionResult run_detector(std::span<const GraphSnapshot> stream,
                             const DetectorConfig& config,
                             std::optional<std::int64_t> horizon = {});

}  // namespace scusum
