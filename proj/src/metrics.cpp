#include "oodt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oodt {

namespace {

void validate(const ScoredLabels& data, const char* what) {
  if (data.scores.empty() || data.scores.size() != data.labels.size()) {
    throw std::invalid_argument(std::string(what) +
                                ": scores/labels must be nonempty, same size");
  }
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (!std::isfinite(data.scores[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite score");
    }
    if (data.labels[i] == 1) {
      has_pos = true;
    } else if (data.labels[i] == 0) {
      has_neg = true;
    } else {
      throw std::invalid_argument(std::string(what) + ": labels must be 0/1");
    }
  }
  if (!has_pos || !has_neg) {
    throw std::invalid_argument(std::string(what) +
                                ": both classes must be present");
  }
}

// Indices sorted by descending score; ties keep input order.
std::vector<std::size_t> descending_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

}  // namespace

double auroc(const ScoredLabels& data) {
  validate(data, "auroc");
  const auto order = descending_order(data.scores);
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (int label : data.labels) {
    if (label == 1) {
      n_pos += 1.0;
    } else {
      n_neg += 1.0;
    }
  }
  // Walk tie groups in descending score order; a positive beats every
  // negative in strictly lower groups and takes half credit inside its own.
  double wins = 0.0;
  double neg_below = n_neg;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double group_pos = 0.0;
    double group_neg = 0.0;
    while (j < order.size() &&
           data.scores[order[j]] == data.scores[order[i]]) {
      if (data.labels[order[j]] == 1) {
        group_pos += 1.0;
      } else {
        group_neg += 1.0;
      }
      ++j;
    }
    neg_below -= group_neg;
    wins += group_pos * neg_below + 0.5 * group_pos * group_neg;
    i = j;
  }
  return wins / (n_pos * n_neg);
}

std::vector<RocPoint> roc_curve(const ScoredLabels& data) {
  validate(data, "roc_curve");
  const auto order = descending_order(data.scores);
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (int label : data.labels) {
    if (label == 1) {
      n_pos += 1.0;
    } else {
      n_neg += 1.0;
    }
  }
  std::vector<RocPoint> points;
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0.0;
  double fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = data.scores[order[i]];
    std::size_t j = i;
    while (j < order.size() && data.scores[order[j]] == threshold) {
      if (data.labels[order[j]] == 1) {
        tp += 1.0;
      } else {
        fp += 1.0;
      }
      ++j;
    }
    points.push_back({threshold, fp / n_neg, tp / n_pos});
    i = j;
  }
  return points;
}

TprFpr tpr_fpr_at(const ScoredLabels& data, double threshold) {
  validate(data, "tpr_fpr_at");
  double tp = 0.0;
  double fp = 0.0;
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (std::size_t i = 0; i < data.scores.size(); ++i) {
    if (data.labels[i] == 1) {
      n_pos += 1.0;
      if (data.scores[i] > threshold) tp += 1.0;
    } else {
      n_neg += 1.0;
      if (data.scores[i] > threshold) fp += 1.0;
    }
  }
  return {tp / n_pos, fp / n_neg};
}

}  // namespace oodt
