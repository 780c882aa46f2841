#include "oodt/distances.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "oodt/ot_solver.hpp"

namespace oodt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_support(const DiscretePmf& p, const DiscretePmf& q,
                          const char* what) {
  if (p.size() != q.size()) {
    throw std::invalid_argument(std::string(what) +
                                ": supports differ in size");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.support()[i] != q.support()[i]) {
      throw std::invalid_argument(std::string(what) +
                                  ": supports differ at index " +
                                  std::to_string(i));
    }
  }
}

// Sum a log(a/b) skipping a = 0 terms; b = 0 with a > 0 yields +inf unless
// `drop_zero_denominator` (the guard used inside the printed JS form).
double kl_sum(const std::vector<double>& a, const std::vector<double>& b,
              bool drop_zero_denominator) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] <= 0.0) continue;
    if (b[i] <= 0.0) {
      if (drop_zero_denominator) continue;
      return kInf;
    }
    total += a[i] * std::log(a[i] / b[i]);
  }
  return total;
}

// Spectral square root with negative eigenvalues clamped at zero; warns on
// stderr when the clamp exceeds 1e-8 in magnitude.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error(std::string(what) +
                             ": eigendecomposition failed");
  }
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -1e-8) {
    std::cerr << what << ": clamping negative eigenvalue " << min_eig
              << " to zero\n";
  }
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

GaussianParams mixture_moment_match(const GaussianParams& p,
                                    const GaussianParams& q) {
  const Eigen::VectorXd mean = 0.5 * (p.mean() + q.mean());
  const Eigen::VectorXd diff = p.mean() - q.mean();
  const Eigen::MatrixXd cov =
      0.5 * (p.cov() + q.cov()) + 0.25 * diff * diff.transpose();
  return GaussianParams(mean, cov);
}

}  // namespace

DistanceKind DistanceKind::wasserstein(double order) {
  if (!(order >= 1.0 && order <= 2.0)) {
    throw std::invalid_argument(
        "DistanceKind: wasserstein order must lie in [1, 2]");
  }
  return DistanceKind{Tag::wasserstein, order};
}

std::string DistanceKind::name() const {
  switch (tag) {
    case Tag::wasserstein: return "wasserstein";
    case Tag::kl: return "kl";
    case Tag::js: return "js";
    case Tag::ks: return "ks";
    case Tag::tv: return "tv";
  }
  return "unknown";
}

DistanceKind DistanceKind::parse(const std::string& name, double order) {
  if (name == "wasserstein") return wasserstein(order);
  if (name == "kl") return kl();
  if (name == "js") return js();
  if (name == "ks") return ks();
  if (name == "tv") return tv();
  throw std::invalid_argument("DistanceKind: unknown distance '" + name + "'");
}

double wasserstein_1d(const Empirical1D& a, const Empirical1D& b,
                      double order) {
  if (!(order >= 1.0 && order <= 2.0)) {
    throw std::invalid_argument("wasserstein_1d: order must lie in [1, 2]");
  }
  const auto& va = a.values();
  const auto& vb = b.values();
  const auto n = static_cast<std::int64_t>(va.size());
  const auto m = static_cast<std::int64_t>(vb.size());
  // Quantile functions are step functions with breakpoints at i/n and j/m;
  // walk the merged partition using integer numerators over n*m to keep the
  // segment lengths exact.
  const auto denom = static_cast<double>(n) * static_cast<double>(m);
  std::int64_t cur = 0;
  std::int64_t ia = 0;
  std::int64_t ib = 0;
  double total = 0.0;
  while (ia < n && ib < m) {
    const std::int64_t next_a = (ia + 1) * m;
    const std::int64_t next_b = (ib + 1) * n;
    const std::int64_t next = std::min(next_a, next_b);
    const double gap = std::abs(va[static_cast<std::size_t>(ia)] -
                                vb[static_cast<std::size_t>(ib)]);
    double piece;
    if (order == 1.0) {
      piece = gap;
    } else if (order == 2.0) {
      piece = gap * gap;
    } else {
      piece = std::pow(gap, order);
    }
    total += piece * static_cast<double>(next - cur) / denom;
    if (next_a == next) ++ia;
    if (next_b == next) ++ib;
    cur = next;
  }
  return std::pow(total, 1.0 / order);
}

double wasserstein2_gaussian(const GaussianParams& p, const GaussianParams& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("wasserstein2_gaussian: dimension mismatch");
  }
  const Eigen::MatrixXd root_q = psd_sqrt(q.cov(), "wasserstein2_gaussian");
  const Eigen::MatrixXd inner = root_q * p.cov() * root_q;
  const Eigen::MatrixXd cross = psd_sqrt(inner, "wasserstein2_gaussian");
  const double mean_term = (p.mean() - q.mean()).squaredNorm();
  const double trace_term =
      p.cov().trace() + q.cov().trace() - 2.0 * cross.trace();
  return std::sqrt(std::max(mean_term + trace_term, 0.0));
}

double kl_gaussian(const GaussianParams& p, const GaussianParams& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("kl_gaussian: dimension mismatch");
  }
  const auto k = static_cast<double>(p.dim());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_q(q.cov());
  if (eig_q.info() != Eigen::Success) {
    throw std::runtime_error("kl_gaussian: eigendecomposition failed");
  }
  const double min_eig = eig_q.eigenvalues().minCoeff();
  const double scale = std::max(1.0, eig_q.eigenvalues().cwiseAbs().maxCoeff());
  if (min_eig <= 1e-300 || min_eig < 1e-14 * scale) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", min_eig);
    throw std::runtime_error(
        std::string("kl_gaussian: covariance of Q is singular (eigenvalue ") +
        buf + ")");
  }
  const Eigen::MatrixXd q_inv =
      eig_q.eigenvectors() *
      eig_q.eigenvalues().cwiseInverse().asDiagonal() *
      eig_q.eigenvectors().transpose();
  double logdet_q = 0.0;
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    logdet_q += std::log(eig_q.eigenvalues()(i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_p(p.cov());
  double logdet_p = 0.0;
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    // A degenerate P pushes the KL to +inf through the log-det ratio.
    logdet_p += std::log(std::max(eig_p.eigenvalues()(i), 0.0));
  }
  const Eigen::VectorXd diff = q.mean() - p.mean();
  const double value = 0.5 * ((q_inv * p.cov()).trace() +
                              diff.dot(q_inv * diff) - k + logdet_q -
                              logdet_p);
  return std::max(value, 0.0);
}

double js_gaussian(const GaussianParams& p, const GaussianParams& q,
                   bool conventional) {
  const GaussianParams m = mixture_moment_match(p, q);
  if (conventional) {
    return 0.5 * (kl_gaussian(p, m) + kl_gaussian(q, m));
  }
  return kl_gaussian(p, m) + kl_gaussian(m, q);
}

double kl_discrete(const DiscretePmf& p, const DiscretePmf& q) {
  require_same_support(p, q, "kl_discrete");
  return kl_sum(p.weights(), q.weights(), false);
}

double js_discrete(const DiscretePmf& p, const DiscretePmf& q,
                   bool conventional) {
  require_same_support(p, q, "js_discrete");
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = 0.5 * (p.weights()[i] + q.weights()[i]);
  }
  if (conventional) {
    return 0.5 * (kl_sum(p.weights(), m, false) + kl_sum(q.weights(), m, false));
  }
  return kl_sum(p.weights(), m, false) + kl_sum(m, q.weights(), true);
}

double ks_1d(const Empirical1D& a, const Empirical1D& b) {
  const auto& va = a.values();
  const auto& vb = b.values();
  const auto na = static_cast<double>(va.size());
  const auto nb = static_cast<double>(vb.size());
  std::size_t ia = 0;
  std::size_t ib = 0;
  double best = 0.0;
  while (ia < va.size() && ib < vb.size()) {
    const double x = std::min(va[ia], vb[ib]);
    while (ia < va.size() && va[ia] <= x) ++ia;
    while (ib < vb.size() && vb[ib] <= x) ++ib;
    best = std::max(best, std::abs(static_cast<double>(ia) / na -
                                   static_cast<double>(ib) / nb));
  }
  return best;
}

double tv_discrete(const DiscretePmf& p, const DiscretePmf& q,
                   bool conventional) {
  require_same_support(p, q, "tv_discrete");
  double sup = 0.0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gap = std::abs(p.weights()[i] - q.weights()[i]);
    sup = std::max(sup, gap);
    l1 += gap;
  }
  return conventional ? 0.5 * l1 : sup;
}

double entropy_discrete(const DiscretePmf& p) {
  double h = 0.0;
  for (double w : p.weights()) {
    if (w > 0.0) h -= w * std::log(w);
  }
  return std::max(h, 0.0);
}

double gaussian_distance(const GaussianParams& p, const GaussianParams& q,
                         const DistanceKind& kind) {
  switch (kind.tag) {
    case DistanceKind::Tag::wasserstein:
      if (kind.order != 2.0) {
        throw std::invalid_argument(
            "gaussian_distance: only order-2 Wasserstein has a Gaussian "
            "closed form");
      }
      return wasserstein2_gaussian(p, q);
    case DistanceKind::Tag::kl:
      return kl_gaussian(p, q);
    case DistanceKind::Tag::js:
      return js_gaussian(p, q);
    case DistanceKind::Tag::ks:
    case DistanceKind::Tag::tv:
      throw std::invalid_argument("gaussian_distance: " + kind.name() +
                                  " is not available for Gaussian references");
  }
  throw std::invalid_argument("gaussian_distance: unknown kind");
}

KlWassersteinChainReport check_kl_w_chain(const DiscretePmf& p,
                                          const DiscretePmf& q) {
  require_same_support(p, q, "check_kl_w_chain");
  KlWassersteinChainReport report;
  const auto& support = p.support();
  report.diameter = support.back() - support.front();
  const auto k = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd cost(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      cost(i, j) = std::abs(support[static_cast<std::size_t>(i)] -
                            support[static_cast<std::size_t>(j)]);
    }
  }
  report.w1 = exact_ot(p, q, cost).cost;
  report.tv = tv_discrete(p, q);
  report.kl = kl_discrete(p, q);
  report.kl_infinite = std::isinf(report.kl);
  report.lhs =
      report.diameter > 0.0 ? 2.0 / report.diameter * report.w1 : 0.0;
  report.rhs = report.kl_infinite ? kInf : std::sqrt(0.5 * report.kl);
  report.holds = report.kl_infinite || report.lhs <= report.rhs + 1e-12;
  return report;
}

}  // namespace oodt
