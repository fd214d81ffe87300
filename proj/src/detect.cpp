#include "scusum/detect.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scusum {

namespace {

// tr(G P) for square G, P.
double trace_product(const Matrix& G, const Matrix& P) {
  if (G.rows() != P.cols() || G.cols() != P.rows()) {
    throw std::invalid_argument("matrix shapes do not agree");
  }
  return G.cwiseProduct(P.transpose()).sum();
}

double squared_size_sum(const IndicatorMatrix& A) {
  double s = 0.0;
  for (int k : A.sizes) s += static_cast<double>(k) * k;
  return s;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kExact: return "exact";
    case Method::kSpectral: return "spectral";
    case Method::kTop1: return "top1";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "exact") return Method::kExact;
  if (name == "spectral") return Method::kSpectral;
  if (name == "top1") return Method::kTop1;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

double DetectorConfig::drift() const {
  if (d) return *d;
  return method == Method::kTop1 ? 0.5 : 0.5 * m;
}

void DetectorConfig::validate() const {
  if (!(b > 0.0)) throw std::invalid_argument("threshold b must be > 0");
  if (method == Method::kExact) {
    if (!A) throw std::invalid_argument("exact method needs the indicator matrix");
    if (exact_scale == ExactScale::kLikelihood && !(sigma > 0.0)) {
      throw std::invalid_argument("likelihood scale needs sigma > 0");
    }
    return;
  }
  if (w < 1) throw std::invalid_argument("window length w must be >= 1");
  if (method == Method::kSpectral && m < 1) {
    throw std::invalid_argument("subspace dimension m must be >= 1");
  }
  if (!(drift() > 0.0)) throw std::invalid_argument("drift d must be > 0");
}

double log_likelihood_ratio(const Matrix& G, const IndicatorMatrix& A,
                            double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  return exact_increment(G, A) / (2.0 * sigma * sigma);
}

double exact_increment(const Matrix& G, const IndicatorMatrix& A) {
  return 2.0 * trace_product(G, mean_matrix(A)) - squared_size_sum(A);
}

double spectral_increment(const Matrix& G, const Matrix& P, double d) {
  return trace_product(G, P) - d;
}

double top1_increment(const Matrix& G, const Vector& v, double d) {
  if (G.rows() != v.size() || G.cols() != v.size()) {
    throw std::invalid_argument("vector length does not match matrix");
  }
  return v.dot(G * v) - d;
}

std::vector<double> cusum_maxform(std::span<const double> increments) {
  std::vector<double> out(increments.size());
  for (std::size_t t = 0; t < increments.size(); ++t) {
    double best = -INFINITY;
    for (std::size_t k = 0; k <= t; ++k) {
      double partial = 0.0;
      for (std::size_t i = k; i <= t; ++i) partial += increments[i];
      if (partial > best) best = partial;
    }
    out[t] = best;
  }
  return out;
}

std::vector<double> cusum_recursive(std::span<const double> increments) {
  std::vector<double> out(increments.size());
  double s = 0.0;
  for (std::size_t t = 0; t < increments.size(); ++t) {
    s = cusum_update(s, increments[t]);
    out[t] = s;
  }
  return out;
}

Detector::Detector(DetectorConfig config) : config_(std::move(config)) {
  config_.validate();
  drift_ = config_.drift();
  if (config_.method == Method::kExact) {
    exact_mean_ = mean_matrix(*config_.A);
    exact_offset_ = squared_size_sum(*config_.A);
    if (config_.exact_scale == ExactScale::kLikelihood) {
      exact_factor_ = 1.0 / (2.0 * config_.sigma * config_.sigma);
    }
  }
}

std::optional<std::int64_t> Detector::stop_time() const {
  if (!stop_index_) return std::nullopt;
  return *stop_index_ + config_.lag();
}

double Detector::increment_for(const Matrix& G,
                               const WindowBuffer& window) const {
  if (config_.method == Method::kSpectral) {
    return spectral_increment(G, projector(estimate_subspace(window, config_.m)),
                              drift_);
  }
  const SpectralEstimate top = estimate_subspace(window, 1);
  return top1_increment(G, top.eigenvectors.col(0), drift_);
}

std::optional<TracePoint> Detector::observe(const GraphSnapshot& snapshot) {
  if (stopped()) return std::nullopt;
  TracePoint step;
  if (config_.method == Method::kExact) {
    if (snapshot.n() != exact_mean_.rows()) {
      throw std::invalid_argument("snapshot node count does not match A");
    }
    step.t = snapshot.t;
    step.increment =
        exact_factor_ *
        (2.0 * trace_product(snapshot.weights, exact_mean_) - exact_offset_);
  } else {
    pending_.push_back(snapshot);
    if (static_cast<int>(pending_.size()) <= config_.w) return std::nullopt;
    WindowBuffer window(config_.w);
    for (std::size_t i = 1; i < pending_.size(); ++i) window.push(pending_[i]);
    step.t = pending_.front().t;
    step.increment = increment_for(pending_.front().weights, window);
    pending_.pop_front();
  }
  statistic_ = cusum_update(statistic_, step.increment);
  step.statistic = statistic_;
  last_scored_ = step.t;
  if (statistic_ >= config_.b) {
    step.alarmed = true;
    stop_index_ = step.t;
    pending_.clear();
  }
  return step;
}

DetectionResult run_detector(std::span<const GraphSnapshot> stream,
                             const DetectorConfig& config,
                             std::optional<std::int64_t> horizon) {
  Detector detector(config);
  DetectionResult result;
  result.config = config;
  std::size_t limit = stream.size();
  if (horizon) {
    if (*horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    limit = std::min(limit, static_cast<std::size_t>(*horizon));
  }
  if (config.method != Method::kExact &&
      limit < static_cast<std::size_t>(config.w) + 1) {
    result.insufficient_data = true;
    return result;
  }
  for (std::size_t i = 0; i < limit && !detector.stopped(); ++i) {
    if (auto step = detector.observe(stream[i])) {
      result.trajectory.push_back(*step);
    }
  }
  result.stop_index = detector.stop_index();
  result.stop_time = detector.stop_time();
  return result;
}

}  // namespace scusum
