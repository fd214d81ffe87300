#pragma once

#include <deque>

#include "scusum/graph_model.hpp"

namespace scusum {

/// FIFO window of the w most recent snapshots.
class WindowBuffer {
 public:
  explicit WindowBuffer(int capacity);

  // Appends and evicts the oldest snapshot once over capacity. Rejects a
  // snapshot whose node count differs or whose time index does not increase.
  void push(GraphSnapshot snapshot);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(items_.size()); }
  bool full() const { return size() == capacity_; }
  const std::deque<GraphSnapshot>& snapshots() const { return items_; }

 private:
  int capacity_;
  std::deque<GraphSnapshot> items_;
};

struct SpectralEstimate {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // n x m, orthonormal columns
};

// Entrywise mean of a full window. iid-full snapshots enter as (G + G^T)/2.
Matrix sliding_mean(const WindowBuffer& buffer);

/// Top-m eigenpairs of a symmetric matrix, largest first.
///
/// Each eigenvector is signed so that its largest-magnitude entry (first such
/// index on exact ties) is positive. Within a repeated eigenvalue the basis
/// is whatever the tridiagonal QR solver returns; it is deterministic for a
/// given input but not canonical, so compare projectors in that case.
SpectralEstimate top_m_eigs(const Matrix& M, int m);

SpectralEstimate estimate_subspace(const WindowBuffer& buffer, int m);

// Â Â^T.
Matrix projector(const SpectralEstimate& est);

}  // namespace scusum
