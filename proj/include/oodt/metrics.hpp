#pragma once

#include <vector>

namespace oodt {

/// Scores with binary labels (1 = OOD/positive, 0 = ID/negative).
struct ScoredLabels {
  std::vector<double> scores;
  std::vector<int> labels;
};

/// Mann-Whitney statistic with half credit for ties:
/// (#{score_pos > score_neg} + 0.5 #{ties}) / (n_pos * n_neg).
/// Equals the trapezoidal area under the tie-grouped ROC curve.
double auroc(const ScoredLabels& data);

struct RocPoint {
  double threshold;  // +inf for the (0,0) corner
  double fpr;
  double tpr;
};

/// Tie-grouped ROC curve: one point per distinct threshold, from (0,0) to
/// (1,1), both coordinates nondecreasing.
std::vector<RocPoint> roc_curve(const ScoredLabels& data);

struct TprFpr {
  double tpr;
  double fpr;
};

/// Rates at a threshold with strict >: tpr = P(score > t | label 1),
/// fpr = P(score > t | label 0).
TprFpr tpr_fpr_at(const ScoredLabels& data, double threshold);

}  // namespace oodt
