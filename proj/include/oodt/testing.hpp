#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oodt/distances.hpp"
#include "oodt/distributions.hpp"

namespace oodt {

/// Knobs of the calibration procedure. batch_size is the expected test batch
/// size used by batch generators and CLI defaults; the calibration batch
/// size itself is implied by the train/validation split.
struct TestConfig {
  double alpha = 0.05;
  DistanceKind distance = DistanceKind::wasserstein(2.0);
  int folds = 100;
  int batch_size = 100;
  double split_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The deployable test artifact: reference model, critical value, and the
/// calibration distances the critical value is a quantile of.
struct Calibration {
  TestConfig config;
  /// Embedding model when calibrated with latent_dim > 0; absent means
  /// batches are compared as ambient Gaussian fits.
  std::optional<FactorModel> model;
  /// Reference distribution (latent posterior of the full training set, or
  /// the ambient Gaussian fit).
  GaussianParams reference;
  double lambda = 0.0;
  int cal_batch_size = 0;
  /// sqrt(m_val)-scaled fold distances; lambda is their (1-alpha) quantile.
  std::vector<double> cal_distances;
};

struct TestOutcome {
  double statistic = 0.0;
  double lambda_used = 0.0;
  bool ood = false;
  int batch_size = 0;

  const char* decision() const { return ood ? "OOD" : "ID"; }
};

/// K repeated random splits: fit the factor model on the split_fraction
/// part, compare latent posteriors of the two parts, record the
/// sqrt(m_val)-scaled distance; lambda is the empirical (1-alpha) quantile
/// with linear interpolation. The reference model is refit on all of train.
/// latent_dim = 0 selects the ambient Gaussian route (no factor model).
Calibration calibrate(const Sample& train, const TestConfig& config,
                      int latent_dim);

/// Same folds evaluated under several distance kinds at once; fold models
/// are shared, so the k-th result equals calibrate() with kinds[k].
std::vector<Calibration> calibrate_many(const Sample& train,
                                        const TestConfig& config,
                                        int latent_dim,
                                        const std::vector<DistanceKind>& kinds);

/// Batch mapped into the calibration's comparison space (latent posterior or
/// ambient Gaussian fit).
GaussianParams embed_batch(const Calibration& cal, const Sample& batch);

/// statistic = sqrt(m) * d(reference, embed(batch)). When m differs from the
/// calibration batch size, lambda is rescaled by sqrt(m / cal_batch_size) --
/// equivalent to comparing unscaled distances, whose null scale is what
/// calibration captured. OOD iff statistic > rescaled lambda.
TestOutcome test_statistic(const Calibration& cal, const Sample& batch);

struct PowerEstimate {
  double power = 0.0;
  double se = 0.0;
  int reps = 0;
};

/// Fraction of OOD decisions over reps batches drawn from make_batch (called
/// with a per-repetition derived seed); se is the binomial standard error.
PowerEstimate power_estimate(
    const Calibration& cal,
    const std::function<Sample(std::uint64_t)>& make_batch, int reps,
    std::uint64_t seed);

// Calibration artifact JSON; doubles round-trip exactly.
std::string calibration_to_json(const Calibration& cal);
Calibration calibration_from_json(const std::string& text);
void save_calibration(const Calibration& cal, const std::string& path);
Calibration load_calibration(const std::string& path);

}  // namespace oodt
