#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace oodt {

/// Default relative covariance regularization: fitted covariances get
/// reg * (trace/d) added to the diagonal so KL / W2 closed forms stay
/// invertible.
inline constexpr double kDefaultCovReg = 1e-6;

/// n x d data matrix, one observation per row. Entries are checked finite at
/// construction and the matrix is immutable afterwards.
class Sample {
 public:
  explicit Sample(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  /// Rows `begin` .. `begin+count-1` as a new Sample.
  Sample middle_rows(Eigen::Index begin, Eigen::Index count) const;

  /// One column as a plain vector (for 1-D empirical distances).
  std::vector<double> column(Eigen::Index col) const;

 private:
  Eigen::MatrixXd values_;
};

/// Mean vector and covariance matrix of a multivariate Gaussian. The
/// covariance is symmetrized at construction; eigenvalues must be
/// nonnegative up to roundoff.
class GaussianParams {
 public:
  GaussianParams(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// Finite discrete distribution: strictly increasing support points with
/// nonnegative weights summing to one (within 1e-9 on input).
class DiscretePmf {
 public:
  DiscretePmf(std::vector<double> support, std::vector<double> weights);

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return support_.size(); }

  static DiscretePmf uniform(std::size_t k);

 private:
  std::vector<double> support_;
  std::vector<double> weights_;
};

/// Sorted 1-D sample; every point carries weight 1/n.
class Empirical1D {
 public:
  /// Sorts a copy of `values`.
  explicit Empirical1D(std::vector<double> values);

  /// Adopts `values`, which must already be nondecreasing.
  static Empirical1D from_sorted(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  Empirical1D() = default;
  std::vector<double> values_;
};

/// Isotropic-noise factor model x = mu + W z + eps with eps ~ N(0, s2 I).
/// Built only by fit_factor_model, which guarantees noise_var > 0 and
/// orthogonal loading columns.
struct FactorModel {
  Eigen::VectorXd mu;       // length d
  Eigen::MatrixXd loading;  // d x p
  double noise_var = 0.0;
  int latent_dim = 0;
};

/// Column means + unbiased covariance, with reg_epsilon * (trace/d) added to
/// the diagonal (an absolute reg_epsilon * I when the covariance is exactly
/// zero, so constant samples still yield an invertible matrix).
GaussianParams fit_gaussian(const Sample& sample, double reg_epsilon);

/// Closed-form probabilistic principal components: loading from the top
/// latent_dim spectral directions of the sample covariance scaled by
/// sqrt(eigenvalue - noise_var); noise_var is the mean of the discarded
/// eigenvalues, floored at 1e-9.
FactorModel fit_factor_model(const Sample& sample, int latent_dim);

/// Gaussian moment-match of the batch's posterior-mean latent scores
/// E[z|x] = M^-1 W^T (x - mu) with M = W^T W + s2 I; the per-point posterior
/// covariance s2 M^-1 is added to the score covariance.
GaussianParams latent_posterior(const FactorModel& model, const Sample& batch);

/// n i.i.d. draws via the spectral square root of the covariance applied to
/// standard-normal variates; deterministic for a fixed seed.
Sample sample_gaussian(const GaussianParams& params, int n, std::uint64_t seed);

/// Bin counts normalized to weights; values outside the edge range are
/// clipped into the end bins; support points are bin midpoints. The last
/// weight absorbs the rounding residual so the weights sum to one exactly.
DiscretePmf histogram(const std::vector<double>& values,
                      const std::vector<double>& bin_edges);

}  // namespace oodt
