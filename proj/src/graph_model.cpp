#include "scusum/graph_model.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace scusum {

void CommunityAssignment::validate() const {
  if (m < 1) throw std::invalid_argument("community count m must be >= 1");
  if (n() < m) {
    throw std::invalid_argument("node count " + std::to_string(n()) +
                                " is smaller than community count " +
                                std::to_string(m));
  }
  std::vector<int> counts(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < n(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label == kBackground) continue;
    if (label < 1 || label > m) {
      throw std::invalid_argument("label " + std::to_string(label) +
                                  " of node " + std::to_string(i) +
                                  " is out of range 1.." + std::to_string(m));
    }
    ++counts[static_cast<std::size_t>(label - 1)];
  }
  for (int k = 0; k < m; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) {
      throw std::invalid_argument("community " + std::to_string(k + 1) +
                                  " is empty");
    }
  }
}

CommunityAssignment assignment_from_sizes(std::span<const int> sizes, int n) {
  if (sizes.empty()) throw std::invalid_argument("no community sizes given");
  long total = 0;
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("community sizes must be positive");
    total += s;
  }
  if (total > n) {
    throw std::invalid_argument("community sizes sum to " +
                                std::to_string(total) + " > node count " +
                                std::to_string(n));
  }
  CommunityAssignment a;
  a.m = static_cast<int>(sizes.size());
  a.labels.assign(static_cast<std::size_t>(n), kBackground);
  std::size_t node = 0;
  for (int k = 0; k < a.m; ++k) {
    for (int j = 0; j < sizes[static_cast<std::size_t>(k)]; ++j) {
      a.labels[node++] = k + 1;
    }
  }
  return a;
}

IndicatorMatrix build_indicator(const CommunityAssignment& assignment) {
  assignment.validate();
  IndicatorMatrix A;
  A.entries = Matrix::Zero(assignment.n(), assignment.m);
  A.sizes.assign(static_cast<std::size_t>(assignment.m), 0);
  for (int i = 0; i < assignment.n(); ++i) {
    const int label = assignment.labels[static_cast<std::size_t>(i)];
    if (label == kBackground) continue;
    A.entries(i, label - 1) = 1.0;
    ++A.sizes[static_cast<std::size_t>(label - 1)];
  }
  return A;
}

Matrix mean_matrix(const IndicatorMatrix& A) {
  return A.entries * A.entries.transpose();
}

bool GraphSnapshot::operator==(const GraphSnapshot& other) const {
  return t == other.t && convention == other.convention &&
         weights.rows() == other.weights.rows() &&
         weights.cols() == other.weights.cols() && weights == other.weights;
}

GraphSnapshot sample_snapshot(const Matrix& mean, double sigma,
                              Convention convention, Rng& rng,
                              std::int64_t t) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (mean.rows() != mean.cols()) {
    throw std::invalid_argument("mean matrix must be square");
  }
  const Eigen::Index n = mean.rows();
  GraphSnapshot g{t, mean, convention};
  if (sigma == 0.0) return g;
  if (convention == Convention::kSymmetric) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double x = mean(i, j) + sigma * rng.normal();
        g.weights(i, j) = x;
        g.weights(j, i) = x;
      }
    }
  } else {
    // Eigen is column-major; keep the documented row-major draw order.
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        g.weights(i, j) = mean(i, j) + sigma * rng.normal();
      }
    }
  }
  return g;
}

void StreamScenario::validate() const {
  assignment.validate();
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (tau && *tau < 0) throw std::invalid_argument("tau must be >= 0");
}

StreamGenerator::StreamGenerator(const StreamScenario& scenario)
    : StreamGenerator(scenario, scenario.seed) {}

StreamGenerator::StreamGenerator(const StreamScenario& scenario,
                                 std::uint64_t seed)
    : sigma_(scenario.sigma),
      tau_(scenario.tau),
      convention_(scenario.convention),
      rng_(seed) {
  scenario.assignment.validate();
  if (!(sigma_ >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  post_mean_ = mean_matrix(build_indicator(scenario.assignment));
  pre_mean_ = Matrix::Zero(post_mean_.rows(), post_mean_.cols());
}

GraphSnapshot StreamGenerator::next() {
  ++t_;
  const bool post = tau_.has_value() && t_ > *tau_;
  return sample_snapshot(post ? post_mean_ : pre_mean_, sigma_, convention_,
                         rng_, t_);
}

std::vector<GraphSnapshot> make_stream(const StreamScenario& scenario) {
  scenario.validate();
  StreamGenerator gen(scenario);
  std::vector<GraphSnapshot> out;
  out.reserve(static_cast<std::size_t>(scenario.horizon));
  for (std::int64_t i = 0; i < scenario.horizon; ++i) out.push_back(gen.next());
  return out;
}

}  // namespace scusum
