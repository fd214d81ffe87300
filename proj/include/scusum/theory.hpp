#pragma once

#include <span>
#include <vector>

#include "scusum/errors.hpp"
#include "scusum/graph_model.hpp"

namespace scusum::theory {

// Design formulas for the spectral CUSUM. Every asymptotic expression is
// evaluated with its o(1) term set to zero, and throws ValidityError outside
// the parameter region where it is meaningful instead of extrapolating.
// log means the natural logarithm throughout.

/// Strictly descending, strictly positive eigenvalues.
struct Spectrum {
  std::vector<double> eigenvalues;

  int m() const { return static_cast<int>(eigenvalues.size()); }
};

// Consumes arbitrary positive values; sorts descending and rejects repeats.
Spectrum make_spectrum(std::vector<double> eigenvalues);
// Nonzero eigenvalues of AA^T for one-hot A are the community sizes.
Spectrum spectrum_from_sizes(std::span<const int> sizes);

/// Pairwise weights M(i,j) = l_i l_j / (l_i - l_j)^2. Symmetric; the diagonal
/// is left at zero and never read.
Matrix pairwise_M(const Spectrum& spectrum);

// sum_i sum_{j != i} ( sum_{k != j} M(i,j) M(k,j) + 2 M(i,j)^2 ).
double window_constant_C(const Matrix& M);
// m (m^2 - 1) max_{i != j} M(i,j)^2.
double window_constant_C_bound(const Matrix& M);

// Post-change mean of tr(G Â Â^T): m - C / w^2. Not clamped; may be <= 0.
double expected_drift_post(int m, double C, double w);

// Kullback-Leibler number tr(AA^T AA^T) / (2 sigma^2).
double kl_info(const IndicatorMatrix& A, double sigma);

// d = sigma^2 delta / 2 + m / delta.
double drift_for_delta(double delta, double sigma, int m);

// exp(-delta d + sigma^2 delta^2 / 2 + m), the printed equalizer identity.
double equalizer_mgf(double delta, double d, double sigma, int m);

// delta* = (m - C/w^2) / sigma^2.
double delta_star(int m, double C, double w, double sigma);

// 2 delta (m - C/w^2) - sigma^2 delta^2 - 2m, the EDD denominator.
double edd_spectral_denominator(double delta, int m, double C, double w,
                                double sigma);
// 2 log(gamma) / denominator + w.
double edd_spectral_approx(double gamma, double delta, int m, double C,
                           double w, double sigma);
// EDD at delta = delta*(w): 2 log(gamma) / ((m/sigma - C/(sigma w^2))^2 - 2m) + w.
double edd_spectral_optimal_delta(double gamma, int m, double C, double w,
                                  double sigma);

// 2 sigma^2 log(gamma) / tr(AA^T AA^T).
double edd_exact_approx(double gamma, const IndicatorMatrix& A, double sigma);

// w* = 2 (log(gamma) m C / (m^2/sigma - 2m)^2)^(1/3).
double optimal_window(double gamma, int m, double C, double sigma);

// d* = (m w^2 - C) / (2 w^2) + m w^2 sigma^2 / (m w^2 - C). Requires
// m w^2 > C (equivalently delta* > 0); the pole at m w^2 = C is rejected.
double optimal_drift(double w_star, int m, double C, double sigma);

// 1 + log(gamma)^(-2/3) (m C)^(1/3) n^2 / (m^2/sigma - 2m)^(2/3).
double optimality_ratio(double gamma, int m, double C, int n, double sigma);

/// Asymptotic covariance of the fluctuation of estimated eigenvector `index`
/// (0-based): sum_{k != index} M(k,index)/w u_k u_k^T, with u_k the columns
/// of `eigenvectors` (n x m) ordered like the spectrum.
Matrix anderson_covariance(const Spectrum& spectrum, const Matrix& eigenvectors,
                           double w, int index);

}  // namespace scusum::theory
