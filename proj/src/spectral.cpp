#include "scusum/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace scusum {

WindowBuffer::WindowBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("window length must be >= 1");
}

void WindowBuffer::push(GraphSnapshot snapshot) {
  if (snapshot.weights.rows() != snapshot.weights.cols()) {
    throw std::invalid_argument("snapshot weights must be square");
  }
  if (!items_.empty()) {
    if (snapshot.n() != items_.back().n()) {
      throw std::invalid_argument("snapshot node count changed within window");
    }
    if (snapshot.t <= items_.back().t) {
      throw std::invalid_argument("snapshot time index must increase");
    }
  }
  items_.push_back(std::move(snapshot));
  if (size() > capacity_) items_.pop_front();
}

Matrix sliding_mean(const WindowBuffer& buffer) {
  if (!buffer.full()) {
    throw std::invalid_argument("window holds " + std::to_string(buffer.size()) +
                                " of " + std::to_string(buffer.capacity()) +
                                " snapshots");
  }
  const auto& items = buffer.snapshots();
  const Eigen::Index n = items.front().weights.rows();
  Matrix sum = Matrix::Zero(n, n);
  bool any_full = false;
  for (const auto& g : items) {
    sum += g.weights;
    any_full = any_full || g.convention == Convention::kIidFull;
  }
  if (any_full) {
    // Symmetric snapshots are unchanged by this, so mixing is harmless.
    sum = 0.5 * (sum + sum.transpose()).eval();
  }
  return sum / static_cast<double>(buffer.capacity());
}

SpectralEstimate top_m_eigs(const Matrix& M, int m) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw std::invalid_argument("matrix must be square");
  if (m < 1 || m > n) {
    throw std::invalid_argument("subspace dimension " + std::to_string(m) +
                                " outside 1.." + std::to_string(n));
  }
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(M, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver did not converge");
  }
  SpectralEstimate out;
  out.eigenvalues.resize(m);
  out.eigenvectors.resize(n, m);
  // Eigen orders ascending.
  for (int k = 0; k < m; ++k) {
    const Eigen::Index src = n - 1 - k;
    out.eigenvalues(k) = solver.eigenvalues()(src);
    Vector v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > best) {
        best = std::abs(v(i));
        arg = i;
      }
    }
    if (v(arg) < 0.0) v = -v;
    out.eigenvectors.col(k) = v;
  }
  return out;
}

SpectralEstimate estimate_subspace(const WindowBuffer& buffer, int m) {
  return top_m_eigs(sliding_mean(buffer), m);
}

Matrix projector(const SpectralEstimate& est) {
  return est.eigenvectors * est.eigenvectors.transpose();
}

}  // namespace scusum
