#include "oodt/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oodt {

SoftmaxVector::SoftmaxVector(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("SoftmaxVector: empty probability vector");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument(
          "SoftmaxVector: probabilities must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument("SoftmaxVector: probabilities sum to " +
                                std::to_string(total) + ", expected 1");
  }
  // Renormalize the residual so downstream identities hold to full precision.
  for (double& p : probs_) p /= total;
}

std::string detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::max_softmax: return "max_softmax";
    case DetectorKind::entropy: return "entropy";
    case DetectorKind::kl_uniform: return "kl_uniform";
    case DetectorKind::wasserstein_uniform: return "wasserstein_uniform";
  }
  return "unknown";
}

DetectorKind parse_detector(const std::string& name) {
  if (name == "max_softmax") return DetectorKind::max_softmax;
  if (name == "entropy") return DetectorKind::entropy;
  if (name == "kl_uniform") return DetectorKind::kl_uniform;
  if (name == "wasserstein_uniform") return DetectorKind::wasserstein_uniform;
  throw std::invalid_argument("parse_detector: unknown detector '" + name +
                              "'");
}

std::array<DetectorKind, 4> all_detectors() {
  return {DetectorKind::max_softmax, DetectorKind::entropy,
          DetectorKind::kl_uniform, DetectorKind::wasserstein_uniform};
}

double max_softmax_score(const SoftmaxVector& s) {
  return 1.0 - *std::max_element(s.probs().begin(), s.probs().end());
}

double entropy_score(const SoftmaxVector& s) {
  double h = 0.0;
  for (double p : s.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

double kl_uniform_score(const SoftmaxVector& s) {
  const double k = static_cast<double>(s.classes());
  double kl = 0.0;
  for (double p : s.probs()) {
    if (p > 0.0) kl += p * std::log(p * k);
  }
  return -kl;
}

double wasserstein_uniform_score(const SoftmaxVector& s) {
  const std::size_t k = s.classes();
  double w1 = 0.0;
  double cdf_s = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    cdf_s += s.probs()[i];
    const double cdf_u =
        static_cast<double>(i + 1) / static_cast<double>(k);
    w1 += std::abs(cdf_s - cdf_u);
  }
  return -w1;
}

double detector_score(const SoftmaxVector& s, DetectorKind kind) {
  switch (kind) {
    case DetectorKind::max_softmax: return max_softmax_score(s);
    case DetectorKind::entropy: return entropy_score(s);
    case DetectorKind::kl_uniform: return kl_uniform_score(s);
    case DetectorKind::wasserstein_uniform: return wasserstein_uniform_score(s);
  }
  throw std::invalid_argument("detector_score: unknown detector kind");
}

std::vector<double> score_population(const std::vector<SoftmaxVector>& batch,
                                     DetectorKind kind) {
  std::vector<double> scores;
  scores.reserve(batch.size());
  for (const SoftmaxVector& s : batch) {
    scores.push_back(detector_score(s, kind));
  }
  return scores;
}

}  // namespace oodt
