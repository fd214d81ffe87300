#include "scusum/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace scusum::theory {

namespace {

void require_gamma(double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma must be > 1");
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
}

double squared_size_sum(const IndicatorMatrix& A) {
  double s = 0.0;
  for (int k : A.sizes) s += static_cast<double>(k) * k;
  return s;
}

// m^2/sigma - 2m; zero at sigma = m/2.
double window_base(int m, double sigma) {
  require_positive(sigma, "sigma");
  const double base = static_cast<double>(m) * m / sigma - 2.0 * m;
  if (base == 0.0) {
    throw ValidityError("m^2/sigma - 2m vanishes (sigma = m/2): singular window formula");
  }
  return base;
}

}  // namespace

Spectrum make_spectrum(std::vector<double> eigenvalues) {
  if (eigenvalues.empty()) throw std::invalid_argument("empty spectrum");
  for (double l : eigenvalues) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("spectrum entries must be positive and finite");
    }
  }
  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<>());
  for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] == eigenvalues[i - 1]) {
      throw ValidityError("degenerate spectrum: repeated eigenvalue " +
                          std::to_string(eigenvalues[i]));
    }
  }
  return Spectrum{std::move(eigenvalues)};
}

Spectrum spectrum_from_sizes(std::span<const int> sizes) {
  std::vector<double> l;
  l.reserve(sizes.size());
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("community sizes must be positive");
    l.push_back(static_cast<double>(s));
  }
  return make_spectrum(std::move(l));
}

Matrix pairwise_M(const Spectrum& spectrum) {
  const int m = spectrum.m();
  Matrix M = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double li = spectrum.eigenvalues[static_cast<std::size_t>(i)];
      const double lj = spectrum.eigenvalues[static_cast<std::size_t>(j)];
      if (li == lj) throw ValidityError("degenerate spectrum: repeated eigenvalue");
      const double gap = li - lj;
      M(i, j) = M(j, i) = li * lj / (gap * gap);
    }
  }
  return M;
}

double window_constant_C(const Matrix& M) {
  const Eigen::Index m = M.rows();
  double C = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      double inner = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        if (k == j) continue;
        inner += M(i, j) * M(k, j);
      }
      C += inner + 2.0 * M(i, j) * M(i, j);
    }
  }
  return C;
}

double window_constant_C_bound(const Matrix& M) {
  const double m = static_cast<double>(M.rows());
  double max_sq = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (i != j) max_sq = std::max(max_sq, M(i, j) * M(i, j));
    }
  }
  return m * (m * m - 1.0) * max_sq;
}

double expected_drift_post(int m, double C, double w) {
  if (!(w >= 1.0)) throw std::invalid_argument("window must be >= 1");
  return m - C / (w * w);
}

double kl_info(const IndicatorMatrix& A, double sigma) {
  require_positive(sigma, "sigma");
  return squared_size_sum(A) / (2.0 * sigma * sigma);
}

double drift_for_delta(double delta, double sigma, int m) {
  require_positive(delta, "delta");
  return 0.5 * sigma * sigma * delta + m / delta;
}

double equalizer_mgf(double delta, double d, double sigma, int m) {
  return std::exp(-delta * d + 0.5 * sigma * sigma * delta * delta + m);
}

double delta_star(int m, double C, double w, double sigma) {
  require_positive(sigma, "sigma");
  const double drift = expected_drift_post(m, C, w);
  if (!(drift > 0.0)) {
    throw ValidityError("delta* undefined: m - C/w^2 = " + std::to_string(drift) +
                        " <= 0 (window too short)");
  }
  return drift / (sigma * sigma);
}

double edd_spectral_denominator(double delta, int m, double C, double w,
                                double sigma) {
  return 2.0 * delta * expected_drift_post(m, C, w) -
         sigma * sigma * delta * delta - 2.0 * m;
}

double edd_spectral_approx(double gamma, double delta, int m, double C,
                           double w, double sigma) {
  require_gamma(gamma);
  const double denom = edd_spectral_denominator(delta, m, C, w, sigma);
  if (!(denom > 0.0)) {
    throw ValidityError("asymptotic regime invalid for these parameters (EDD denominator " +
                        std::to_string(denom) + " <= 0)");
  }
  return 2.0 * std::log(gamma) / denom + w;
}

double edd_spectral_optimal_delta(double gamma, int m, double C, double w,
                                  double sigma) {
  return edd_spectral_approx(gamma, delta_star(m, C, w, sigma), m, C, w, sigma);
}

double edd_exact_approx(double gamma, const IndicatorMatrix& A, double sigma) {
  require_gamma(gamma);
  const double energy = squared_size_sum(A);
  if (!(energy > 0.0)) throw ValidityError("no community structure: tr(AA^T AA^T) = 0");
  return 2.0 * sigma * sigma * std::log(gamma) / energy;
}

double optimal_window(double gamma, int m, double C, double sigma) {
  require_gamma(gamma);
  const double base = window_base(m, sigma);
  return 2.0 * std::cbrt(std::log(gamma) * m * C / (base * base));
}

double optimal_drift(double w_star, int m, double C, double sigma) {
  require_positive(w_star, "window");
  const double w2 = w_star * w_star;
  const double excess = m * w2 - C;
  if (!(excess > 0.0)) {
    throw ValidityError("optimal drift undefined: m w^2 - C = " + std::to_string(excess) +
                        " <= 0 (pole at m w^2 = C)");
  }
  return excess / (2.0 * w2) + m * w2 * sigma * sigma / excess;
}

double optimality_ratio(double gamma, int m, double C, int n, double sigma) {
  require_gamma(gamma);
  const double base = window_base(m, sigma);
  const double nn = static_cast<double>(n) * n;
  return 1.0 + std::pow(std::log(gamma), -2.0 / 3.0) * std::cbrt(m * C) * nn /
                   std::cbrt(base * base);
}

Matrix anderson_covariance(const Spectrum& spectrum, const Matrix& eigenvectors,
                           double w, int index) {
  const int m = spectrum.m();
  if (index < 0 || index >= m) throw std::invalid_argument("eigen index out of range");
  if (eigenvectors.cols() != m) {
    throw std::invalid_argument("eigenvector count does not match spectrum");
  }
  require_positive(w, "window");
  const Matrix M = pairwise_M(spectrum);
  const Eigen::Index n = eigenvectors.rows();
  Matrix cov = Matrix::Zero(n, n);
  for (int k = 0; k < m; ++k) {
    if (k == index) continue;
    const auto u = eigenvectors.col(k);
    cov += (M(k, index) / w) * (u * u.transpose());
  }
  return cov;
}

}  // namespace scusum::theory
