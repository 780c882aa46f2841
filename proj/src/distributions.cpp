#include "oodt/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "oodt/rng.hpp"

namespace oodt {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) +
                                ": non-finite entries are not allowed");
  }
}

}  // namespace

Sample::Sample(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw std::invalid_argument("Sample: need at least one row and column");
  }
  require_finite(values_, "Sample");
}

Sample Sample::middle_rows(Eigen::Index begin, Eigen::Index count) const {
  if (begin < 0 || count < 1 || begin + count > values_.rows()) {
    throw std::invalid_argument("Sample::middle_rows: range out of bounds");
  }
  return Sample(values_.middleRows(begin, count));
}

std::vector<double> Sample::column(Eigen::Index col) const {
  if (col < 0 || col >= values_.cols()) {
    throw std::invalid_argument("Sample::column: index out of bounds");
  }
  std::vector<double> out(static_cast<std::size_t>(values_.rows()));
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = values_(i, col);
  }
  return out;
}

GaussianParams::GaussianParams(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size()) {
    throw std::invalid_argument("GaussianParams: mean/cov dimension mismatch");
  }
  require_finite(mean_, "GaussianParams mean");
  require_finite(cov_, "GaussianParams cov");
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_,
                                                     Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (min_eig < -1e-8 * scale) {
    throw std::invalid_argument(
        "GaussianParams: covariance not positive semidefinite (eigenvalue " +
        std::to_string(min_eig) + ")");
  }
}

DiscretePmf::DiscretePmf(std::vector<double> support,
                         std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty() || support_.size() != weights_.size()) {
    throw std::invalid_argument("DiscretePmf: support/weights size mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!std::isfinite(support_[i]) || !std::isfinite(weights_[i])) {
      throw std::invalid_argument("DiscretePmf: non-finite entry");
    }
    if (weights_[i] < 0.0) {
      throw std::invalid_argument("DiscretePmf: negative weight at index " +
                                  std::to_string(i));
    }
    if (i > 0 && !(support_[i] > support_[i - 1])) {
      throw std::invalid_argument(
          "DiscretePmf: support must be strictly increasing");
    }
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("DiscretePmf: weights sum to " +
                                std::to_string(total) + ", expected 1");
  }
}

DiscretePmf DiscretePmf::uniform(std::size_t k) {
  if (k == 0) throw std::invalid_argument("DiscretePmf::uniform: k must be positive");
  std::vector<double> support(k);
  std::vector<double> weights(k, 1.0 / static_cast<double>(k));
  for (std::size_t i = 0; i < k; ++i) support[i] = static_cast<double>(i);
  // Exact unit sum regardless of k.
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) partial += weights[i];
  weights[k - 1] = 1.0 - partial;
  return DiscretePmf(std::move(support), std::move(weights));
}

Empirical1D::Empirical1D(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("Empirical1D: empty sample");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Empirical1D: non-finite value");
    }
  }
  std::sort(values.begin(), values.end());
  values_ = std::move(values);
}

Empirical1D Empirical1D::from_sorted(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("Empirical1D: empty sample");
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[i - 1]) {
      throw std::invalid_argument("Empirical1D::from_sorted: not sorted");
    }
  }
  Empirical1D e;
  e.values_ = std::move(values);
  return e;
}

GaussianParams fit_gaussian(const Sample& sample, double reg_epsilon) {
  if (sample.rows() < 2) {
    throw std::invalid_argument(
        "fit_gaussian: need at least 2 observations, got " +
        std::to_string(sample.rows()));
  }
  if (reg_epsilon < 0.0) {
    throw std::invalid_argument("fit_gaussian: reg_epsilon must be >= 0");
  }
  const Eigen::MatrixXd& x = sample.values();
  const auto n = static_cast<double>(x.rows());
  const auto d = static_cast<double>(x.cols());
  const Eigen::VectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / (n - 1.0);
  if (reg_epsilon > 0.0) {
    const double tr = cov.trace();
    const double ridge = tr > 0.0 ? reg_epsilon * tr / d : reg_epsilon;
    cov.diagonal().array() += ridge;
  }
  return GaussianParams(mean, cov);
}

FactorModel fit_factor_model(const Sample& sample, int latent_dim) {
  const Eigen::Index d = sample.cols();
  const Eigen::Index n = sample.rows();
  if (latent_dim < 1) {
    throw std::invalid_argument("fit_factor_model: latent_dim must be >= 1");
  }
  if (latent_dim >= d) {
    throw std::invalid_argument("fit_factor_model: latent_dim " +
                                std::to_string(latent_dim) +
                                " must be smaller than feature dim " +
                                std::to_string(d));
  }
  if (n <= latent_dim) {
    throw std::invalid_argument(
        "fit_factor_model: need more observations than latent dimensions");
  }
  const Eigen::MatrixXd& x = sample.values();
  const Eigen::VectorXd mu = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mu.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / (static_cast<double>(n) - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("fit_factor_model: eigendecomposition failed");
  }
  // Eigen reports eigenvalues in ascending order; the top latent_dim live at
  // the tail.
  const Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd evecs = eig.eigenvectors();
  const Eigen::Index p = latent_dim;
  double discarded = 0.0;
  for (Eigen::Index i = 0; i < d - p; ++i) discarded += evals(i);
  const double noise_var =
      std::max(discarded / static_cast<double>(d - p), 1e-9);
  Eigen::MatrixXd loading(d, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Index src = d - 1 - j;  // descending eigenvalue order
    const double scale = std::sqrt(std::max(evals(src) - noise_var, 0.0));
    loading.col(j) = evecs.col(src) * scale;
  }
  FactorModel model;
  model.mu = mu;
  model.loading = std::move(loading);
  model.noise_var = noise_var;
  model.latent_dim = latent_dim;
  return model;
}

GaussianParams latent_posterior(const FactorModel& model, const Sample& batch) {
  const Eigen::Index d = model.mu.size();
  const Eigen::Index p = model.loading.cols();
  if (batch.cols() != d) {
    throw std::invalid_argument("latent_posterior: batch has " +
                                std::to_string(batch.cols()) +
                                " features, model expects " +
                                std::to_string(d));
  }
  const Eigen::MatrixXd m =
      model.loading.transpose() * model.loading +
      model.noise_var * Eigen::MatrixXd::Identity(p, p);
  const Eigen::MatrixXd m_inv = m.llt().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd centered =
      batch.values().rowwise() - model.mu.transpose();
  // Scores: one posterior mean E[z|x] per row.
  const Eigen::MatrixXd scores = centered * model.loading * m_inv.transpose();
  const auto nb = static_cast<double>(scores.rows());
  const Eigen::VectorXd mean = scores.colwise().mean();
  Eigen::MatrixXd cov = model.noise_var * m_inv;
  if (scores.rows() >= 2) {
    const Eigen::MatrixXd sc = scores.rowwise() - mean.transpose();
    cov += (sc.transpose() * sc) / (nb - 1.0);
  }
  return GaussianParams(mean, cov);
}

Sample sample_gaussian(const GaussianParams& params, int n,
                       std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("sample_gaussian: n must be positive");
  }
  const Eigen::Index d = params.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(params.cov());
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("sample_gaussian: eigendecomposition failed");
  }
  const double scale =
      std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw std::invalid_argument(
        "sample_gaussian: covariance not positive semidefinite");
  }
  const Eigen::MatrixXd root =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      eig.eigenvectors().transpose();
  Rng rng(seed);
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.normal();
  }
  Eigen::MatrixXd out = z * root;  // root is symmetric
  out.rowwise() += params.mean().transpose();
  return Sample(std::move(out));
}

DiscretePmf histogram(const std::vector<double>& values,
                      const std::vector<double>& bin_edges) {
  if (values.empty()) {
    throw std::invalid_argument("histogram: empty input");
  }
  if (bin_edges.size() < 2) {
    throw std::invalid_argument("histogram: need at least two bin edges");
  }
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw std::invalid_argument(
          "histogram: bin edges must be strictly increasing");
    }
  }
  const std::size_t k = bin_edges.size() - 1;
  std::vector<double> counts(k, 0.0);
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("histogram: non-finite value");
    }
    auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
    std::size_t bin;
    if (it == bin_edges.begin()) {
      bin = 0;  // below range, clip
    } else {
      bin = static_cast<std::size_t>(it - bin_edges.begin()) - 1;
      if (bin >= k) bin = k - 1;  // above range, clip
    }
    counts[bin] += 1.0;
  }
  const auto total = static_cast<double>(values.size());
  std::vector<double> support(k);
  std::vector<double> weights(k);
  for (std::size_t i = 0; i < k; ++i) {
    support[i] = 0.5 * (bin_edges[i] + bin_edges[i + 1]);
    weights[i] = counts[i] / total;
  }
  // Exact unit sum: the last bin absorbs the rounding residual.
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) partial += weights[i];
  weights[k - 1] = 1.0 - partial;
  return DiscretePmf(std::move(support), std::move(weights));
}

}  // namespace oodt
