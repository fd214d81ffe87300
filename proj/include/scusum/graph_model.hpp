#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scusum/rng.hpp"

namespace scusum {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kBackground = 0;

/// Per-node community labels. Label k in 1..m places the node in community
/// C_k; kBackground marks a node that belongs to no community and keeps a
/// zero-mean row after the change.
struct CommunityAssignment {
  int m = 0;
  std::vector<int> labels;

  int n() const { return static_cast<int>(labels.size()); }

  // Throws std::invalid_argument unless n >= m >= 1, every label is in
  // {kBackground, 1..m}, and every community is non-empty.
  void validate() const;
};

// Contiguous layout: the first sizes[0] nodes form community 1, the next
// sizes[1] community 2, and so on; nodes past sum(sizes) are background.
CommunityAssignment assignment_from_sizes(std::span<const int> sizes, int n);

struct IndicatorMatrix {
  Matrix entries;          // n x m, one-hot rows or zero rows
  std::vector<int> sizes;  // column sums

  int n() const { return static_cast<int>(entries.rows()); }
  int m() const { return static_cast<int>(entries.cols()); }
};

IndicatorMatrix build_indicator(const CommunityAssignment& assignment);

// AA^T: 1 where nodes i and j share a community, 0 elsewhere.
Matrix mean_matrix(const IndicatorMatrix& A);

enum class Convention {
  kSymmetric,  // upper triangle incl. diagonal drawn, mirrored below
  kIidFull,    // every one of the n^2 entries drawn independently
};

struct GraphSnapshot {
  std::int64_t t = 0;
  Matrix weights;
  Convention convention = Convention::kSymmetric;

  int n() const { return static_cast<int>(weights.rows()); }
  bool operator==(const GraphSnapshot& other) const;
};

/// Draws one snapshot with entrywise mean `mean` and noise level `sigma`.
///
/// Draw order is row-major over the sampled entries: (0,0), (0,1), ...,
/// (0,n-1), (1,1), ... for the symmetric convention and all n^2 entries for
/// iid-full. With sigma == 0 no random numbers are consumed.
GraphSnapshot sample_snapshot(const Matrix& mean, double sigma,
                              Convention convention, Rng& rng,
                              std::int64_t t = 0);

struct StreamScenario {
  CommunityAssignment assignment;
  double sigma = 1.0;
  std::optional<std::int64_t> tau;  // nullopt: the change never happens
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  Convention convention = Convention::kSymmetric;

  void validate() const;
};

/// Lazily produces the snapshots of a scenario, t = 1, 2, ..., without an
/// upper bound. Snapshots with t <= tau have zero mean, later ones mean AA^T.
class StreamGenerator {
 public:
  explicit StreamGenerator(const StreamScenario& scenario);
  StreamGenerator(const StreamScenario& scenario, std::uint64_t seed);

  GraphSnapshot next();
  std::int64_t time() const { return t_; }

 private:
  Matrix pre_mean_;
  Matrix post_mean_;
  double sigma_;
  std::optional<std::int64_t> tau_;
  Convention convention_;
  Rng rng_;
  std::int64_t t_ = 0;
};

// Snapshots 1..horizon of the scenario.
std::vector<GraphSnapshot> make_stream(const StreamScenario& scenario);

}  // namespace scusum
