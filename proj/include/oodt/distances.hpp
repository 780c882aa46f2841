#pragma once

#include <string>

#include "oodt/distributions.hpp"

namespace oodt {

/// Which distributional distance a statistic is built on. Wasserstein order
/// is restricted to [1, 2], the range the concentration bounds cover.
struct DistanceKind {
  enum class Tag { wasserstein, kl, js, ks, tv };

  Tag tag = Tag::wasserstein;
  double order = 2.0;

  static DistanceKind wasserstein(double order = 2.0);
  static DistanceKind kl() { return DistanceKind{Tag::kl, 2.0}; }
  static DistanceKind js() { return DistanceKind{Tag::js, 2.0}; }
  static DistanceKind ks() { return DistanceKind{Tag::ks, 2.0}; }
  static DistanceKind tv() { return DistanceKind{Tag::tv, 2.0}; }

  std::string name() const;
  static DistanceKind parse(const std::string& name, double order = 2.0);
};

/// Exact p-Wasserstein between two empirical measures via the quantile
/// representation: integrate |Fa^-1(u) - Fb^-1(u)|^p over the merged
/// breakpoint partition of (0,1), then take the 1/p power. Reduces to the
/// sorted-pairing formula for equal sizes.
double wasserstein_1d(const Empirical1D& a, const Empirical1D& b,
                      double order);

/// 2-Wasserstein between Gaussians:
/// sqrt(|mu1-mu2|^2 + tr(S1 + S2 - 2 (S2^1/2 S1 S2^1/2)^1/2)).
/// Matrix square roots use spectral decompositions; small negative
/// eigenvalues are clamped to zero (with a stderr warning above 1e-8).
double wasserstein2_gaussian(const GaussianParams& p, const GaussianParams& q);

/// KL(P || Q) for Gaussians:
/// 0.5 (tr(S1^-1 S0) + (m1-m0)' S1^-1 (m1-m0) - k + ln det S1/det S0).
/// Throws if S1 is singular, naming the offending eigenvalue.
double kl_gaussian(const GaussianParams& p, const GaussianParams& q);

/// JS between Gaussians with the mixture replaced by its Gaussian moment
/// match (no closed form exists for the true mixture). Default follows the
/// unhalved form KL(P,M) + KL(M,Q); conventional=true gives
/// 0.5 (KL(P,M) + KL(Q,M)).
double js_gaussian(const GaussianParams& p, const GaussianParams& q,
                   bool conventional = false);

/// Sum p log(p/q) in nats over a shared support; 0 log(0/q) counts as zero.
/// Returns +infinity when P puts mass where Q has none (the flagged
/// sentinel; never a silent overflow).
double kl_discrete(const DiscretePmf& p, const DiscretePmf& q);

/// Default is the unhalved form KL(P,M) + KL(M,Q) with M = (P+Q)/2;
/// zero-denominator terms are dropped so the value stays finite (they arise
/// in KL(M,Q) wherever Q has a hole). conventional=true gives the textbook
/// 0.5 (KL(P,M) + KL(Q,M)). The unhalved form is not symmetric in (P,Q).
double js_discrete(const DiscretePmf& p, const DiscretePmf& q,
                   bool conventional = false);

/// Two-sample Kolmogorov-Smirnov: max |Fa - Fb| over the merged support.
double ks_1d(const Empirical1D& a, const Empirical1D& b);

/// Default is the pointwise form sup_x |P(x) - Q(x)| over the shared
/// support; conventional=true gives the half-L1 form.
double tv_discrete(const DiscretePmf& p, const DiscretePmf& q,
                   bool conventional = false);

/// Shannon entropy in nats; 0 log 0 = 0.
double entropy_discrete(const DiscretePmf& p);

/// Closed-form distance between two Gaussians under `kind`. Supported:
/// wasserstein (order 2 only), kl, js. ks/tv have no Gaussian closed form
/// here and throw.
double gaussian_distance(const GaussianParams& p, const GaussianParams& q,
                         const DistanceKind& kind);

/// One evaluation of the chain (2/C) W1(P,Q) <= sqrt(0.5 KL(P,Q)) with
/// C the support diameter and W1 from the exact transport solver.
struct KlWassersteinChainReport {
  double w1 = 0.0;
  double tv = 0.0;
  double kl = 0.0;
  double diameter = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool kl_infinite = false;  // chain vacuously true when set
  bool holds = false;
};

KlWassersteinChainReport check_kl_w_chain(const DiscretePmf& p,
                                          const DiscretePmf& q);

}  // namespace oodt
