#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oodt/bounds.hpp"
#include "oodt/detectors.hpp"
#include "oodt/distributions.hpp"
#include "oodt/testing.hpp"

namespace oodt {

/// Generative-model experiment configuration. Defaults reproduce the
/// n=500, d=100, p=2 setting with latent covariance [1.0 0.6; 0.6 1.0],
/// batches of 100 with half OOD prevalence, and a 10-point shift grid on
/// [0, 1].
struct ExperimentConfig {
  int n = 500;
  int d = 100;
  int latent_dim = 2;
  Eigen::MatrixXd latent_cov = default_latent_cov();
  double noise_sd = 0.1;
  int batch_size = 100;
  int n_batches = 100;
  double ood_fraction = 0.5;
  std::vector<double> shift_grid = default_shift_grid();
  int reps = 20;
  double alpha = 0.05;
  int folds = 100;
  std::uint64_t seed = 1;

  static Eigen::MatrixXd default_latent_cov();
  static std::vector<double> default_shift_grid();
  void validate() const;
};

struct FlData {
  Sample train;
  Sample true_latents;
  Eigen::MatrixXd mixing;  // d x p
};

/// Latents z ~ N(0, latent_cov), mixing matrix entries i.i.d. standard
/// normal (drawn once per seed), x = mixing z + eps with
/// eps ~ N(0, noise_sd^2 I). Deterministic per seed.
FlData generate_fl_data(const ExperimentConfig& config, std::uint64_t seed);

/// Batch of size m whose latents are N(shift * sd(z) * 1, latent_cov),
/// mapped through the same mixing matrix and noise model. shift = 0 gives an
/// in-distribution batch.
Sample make_ood_batch(const ExperimentConfig& config,
                      const Eigen::MatrixXd& mixing, double shift, int m,
                      std::uint64_t seed);

struct ShiftCurveRow {
  std::string distance;
  double shift = 0.0;
  double auroc_mean = 0.0;
  double auroc_lo = 0.0;   // empirical 5% quantile across reps
  double auroc_hi = 0.0;   // empirical 95% quantile across reps
};

struct ShiftCurve {
  std::vector<ShiftCurveRow> rows;  // ordered by (distance, shift)
};

/// Full shift experiment: per rep, generate data, calibrate the Wasserstein,
/// KL and JS tests, stream labeled batches at every shift, and score each
/// batch by its scaled statistic; AUROC against the true batch labels is
/// aggregated across reps (mean + 5%/95% band). Output is identical for any
/// thread count.
ShiftCurve run_shift_experiment(const ExperimentConfig& config,
                                int threads = 1);

std::string shift_curve_csv(const ShiftCurve& curve);

/// Knobs of the 1-D Gaussian theorem harness. The reference measure is a
/// deterministic midpoint-quantile grid standing in for P = N(0,1), so the
/// scaled distances stabilize as m grows; lambda is still calibrated from
/// Monte Carlo null batches.
struct HarnessOptions {
  double order = 2.0;
  int ref_points = 4096;
  int cal_batches = 2000;
};

/// Midpoint-quantile grid of N(0,1) with `points` atoms.
Empirical1D gaussian_quantile_grid(int points);

/// sqrt(m) * W_order(reference, batch): the scaled test statistic of the
/// empirical route.
double scaled_statistic_1d(const Empirical1D& reference,
                           const Empirical1D& batch, double order);

struct PowerCurveRow {
  int m = 0;
  double shift = 0.0;
  double delta_hat = 0.0;  // sqrt(m) * mean measured distance
  double lambda = 0.0;
  double power = 0.0;
  double se = 0.0;
};

/// Empirical power of the 1-D test N(0,1) vs N(shift_m, 1) at each m, with
/// lambda calibrated per m from null batches. shift_m =
/// fixed_shift / m^shift_decay (decay 0 = fixed alternative, 1 = vanishing,
/// 0.5 = intermediate).
std::vector<PowerCurveRow> run_power_curve(const ExperimentConfig& config,
                                           const std::vector<int>& m_grid,
                                           double fixed_shift,
                                           double shift_decay = 0.0,
                                           const HarnessOptions& options = {},
                                           int threads = 1);

std::string power_curve_csv(const std::vector<PowerCurveRow>& rows);

struct BoundCheckOptions {
  std::vector<int> m_grid = {50, 200, 1000};
  std::vector<double> shift_grid = {0.3, 0.5, 1.0};  // fixed alternatives
  std::vector<double> c_grid = {0.75, 1.0, 1.5, 2.0};  // shift = c / sqrt(m)
  HarnessOptions harness;
};

struct BoundCheckResult {
  std::vector<BoundReportRow> rows;
  /// Smallest phi' in the grid for which the lower-bound dominance
  /// (empirical power >= bound - 3 se) fails at some row, if any.
  std::optional<double> first_failing_phi;
};

/// Monte Carlo check of the power bounds: lower-bound rows wherever the
/// measured separation satisfies delta_hat >= lambda, intermediate rows
/// wherever the c/sqrt(m) alternatives give delta_hat < lambda.
BoundCheckResult run_bound_check(const ExperimentConfig& config,
                                 const std::vector<double>& phi_grid,
                                 const BoundCheckOptions& options = {},
                                 int threads = 1);

struct SoftmaxPopulation {
  std::vector<SoftmaxVector> vectors;
  std::vector<int> labels;  // 0 = ID, 1 = OOD
};

/// Synthetic softmax populations from symmetric Dirichlet draws: small
/// concentration gives peaked (confident, ID-like) vectors, large
/// concentration flat (OOD-like) ones. Deterministic per seed.
SoftmaxPopulation generate_softmax_populations(int classes, int n_id,
                                               int n_ood,
                                               double concentration_id,
                                               double concentration_ood,
                                               std::uint64_t seed);

struct DetectorSummaryRow {
  std::string detector;
  double auroc = 0.0;
  double tpr_at_alpha = 0.0;
  double fpr_at_alpha = 0.0;
};

/// All four detectors on one labeled population; TPR/FPR are taken at the
/// (1-alpha) quantile of the ID scores (the calibrated threshold).
std::vector<DetectorSummaryRow> summarize_detectors(
    const SoftmaxPopulation& population, double alpha);

std::string detector_summary_csv(const std::vector<DetectorSummaryRow>& rows);

}  // namespace oodt
