#pragma once

#include <array>
#include <string>
#include <vector>

namespace oodt {

/// Softmax probability vector over k classes: entries nonnegative, summing
/// to one within 1e-6.
class SoftmaxVector {
 public:
  explicit SoftmaxVector(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  std::size_t classes() const { return probs_.size(); }

 private:
  std::vector<double> probs_;
};

enum class DetectorKind { max_softmax, entropy, kl_uniform, wasserstein_uniform };

std::string detector_name(DetectorKind kind);
DetectorKind parse_detector(const std::string& name);
std::array<DetectorKind, 4> all_detectors();

// Per-sample OOD scores from a classifier's softmax output. All four share
// one orientation: higher score = more OOD-like.

/// 1 - max(probs).
double max_softmax_score(const SoftmaxVector& s);

/// Shannon entropy of the softmax in nats.
double entropy_score(const SoftmaxVector& s);

/// -KL(s || Uniform_k); identically entropy_score(s) - ln k.
double kl_uniform_score(const SoftmaxVector& s);

/// -W1(s, Uniform_k) with ground metric |i-j| on class indices, evaluated
/// as the CDF-difference sum. Sensitive to class ordering by construction.
double wasserstein_uniform_score(const SoftmaxVector& s);

double detector_score(const SoftmaxVector& s, DetectorKind kind);

/// Elementwise, order-preserving application of one detector.
std::vector<double> score_population(const std::vector<SoftmaxVector>& batch,
                                     DetectorKind kind);

}  // namespace oodt
