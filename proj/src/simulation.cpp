#include "oodt/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "oodt/io.hpp"
#include "oodt/mathutil.hpp"
#include "oodt/metrics.hpp"
#include "oodt/parallel.hpp"
#include "oodt/rng.hpp"

namespace oodt {

namespace {

// Seed stream tags so the derived generators of different phases never
// collide.
constexpr std::uint64_t kStreamMixing = 0;
constexpr std::uint64_t kStreamCalibrate = 1;
constexpr std::uint64_t kStreamBatches = 2;
constexpr std::uint64_t kStreamNull = 3;
constexpr std::uint64_t kStreamAlt = 4;

Eigen::MatrixXd spectral_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("spectral_sqrt: eigendecomposition failed");
  }
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument("spectral_sqrt: matrix not PSD");
  }
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

Eigen::MatrixXd draw_normals(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  }
  return out;
}

std::vector<double> draw_normal_vector(Rng& rng, int n, double mean) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& v : out) v = mean + rng.normal();
  return out;
}

double mean_of(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

struct NullCalibration {
  double lambda = 0.0;
  std::vector<double> scaled_stats;
};

// (1-alpha) quantile of the sqrt(m)-scaled null distances against the
// quantile-grid reference.
NullCalibration calibrate_1d(const Empirical1D& reference, int m, double alpha,
                             const HarnessOptions& options,
                             std::uint64_t seed, int threads) {
  NullCalibration cal;
  cal.scaled_stats.resize(static_cast<std::size_t>(options.cal_batches));
  parallel_for(cal.scaled_stats.size(), threads, [&](std::size_t b) {
    Rng rng(mix_seed(seed, b));
    const Empirical1D batch(draw_normal_vector(rng, m, 0.0));
    cal.scaled_stats[b] = scaled_statistic_1d(reference, batch, options.order);
  });
  cal.lambda = empirical_quantile(cal.scaled_stats, 1.0 - alpha);
  return cal;
}

struct AltRun {
  double delta_hat = 0.0;  // sqrt(m) * mean distance
  double power = 0.0;
  double se = 0.0;
};

AltRun run_alternative_1d(const Empirical1D& reference, int m, double shift,
                          double lambda, int reps,
                          const HarnessOptions& options, std::uint64_t seed,
                          int threads) {
  std::vector<double> distances(static_cast<std::size_t>(reps));
  parallel_for(distances.size(), threads, [&](std::size_t r) {
    Rng rng(mix_seed(seed, r));
    const Empirical1D batch(draw_normal_vector(rng, m, shift));
    distances[r] = wasserstein_1d(reference, batch, options.order);
  });
  const double root_m = std::sqrt(static_cast<double>(m));
  int rejected = 0;
  for (double d : distances) {
    if (root_m * d > lambda) ++rejected;
  }
  AltRun run;
  run.delta_hat = root_m * mean_of(distances);
  run.power = static_cast<double>(rejected) / static_cast<double>(reps);
  run.se = std::sqrt(run.power * (1.0 - run.power) /
                     static_cast<double>(reps));
  return run;
}

}  // namespace

Eigen::MatrixXd ExperimentConfig::default_latent_cov() {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.6, 0.6, 1.0;
  return cov;
}

std::vector<double> ExperimentConfig::default_shift_grid() {
  std::vector<double> grid(10);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = static_cast<double>(i) / 9.0;
  }
  return grid;
}

void ExperimentConfig::validate() const {
  if (n < 4) throw std::invalid_argument("ExperimentConfig: n too small");
  if (d < 2) throw std::invalid_argument("ExperimentConfig: d must be >= 2");
  if (latent_dim < 1 || latent_dim >= d) {
    throw std::invalid_argument(
        "ExperimentConfig: latent_dim must lie in [1, d)");
  }
  if (latent_cov.rows() != latent_dim || latent_cov.cols() != latent_dim) {
    throw std::invalid_argument(
        "ExperimentConfig: latent_cov must be latent_dim x latent_dim");
  }
  if (!(noise_sd > 0.0)) {
    throw std::invalid_argument("ExperimentConfig: noise_sd must be > 0");
  }
  if (batch_size < 2) {
    throw std::invalid_argument("ExperimentConfig: batch_size must be >= 2");
  }
  if (n_batches < 1) {
    throw std::invalid_argument("ExperimentConfig: n_batches must be >= 1");
  }
  if (!(ood_fraction >= 0.0 && ood_fraction <= 1.0)) {
    throw std::invalid_argument(
        "ExperimentConfig: ood_fraction must lie in [0, 1]");
  }
  if (shift_grid.empty()) {
    throw std::invalid_argument("ExperimentConfig: shift_grid is empty");
  }
  if (reps < 1) throw std::invalid_argument("ExperimentConfig: reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("ExperimentConfig: alpha must lie in (0, 1)");
  }
  if (folds < 1) throw std::invalid_argument("ExperimentConfig: folds must be >= 1");
}

FlData generate_fl_data(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const Eigen::Index n = config.n;
  const Eigen::Index d = config.d;
  const Eigen::Index p = config.latent_dim;
  Rng rng(mix_seed(seed, kStreamMixing));
  Eigen::MatrixXd mixing = draw_normals(rng, d, p);
  const Eigen::MatrixXd cov_root = spectral_sqrt(config.latent_cov);
  Eigen::MatrixXd latents = draw_normals(rng, n, p) * cov_root;
  Eigen::MatrixXd x =
      latents * mixing.transpose() + config.noise_sd * draw_normals(rng, n, d);
  return FlData{Sample(std::move(x)), Sample(std::move(latents)),
                std::move(mixing)};
}

Sample make_ood_batch(const ExperimentConfig& config,
                      const Eigen::MatrixXd& mixing, double shift, int m,
                      std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("make_ood_batch: m must be positive");
  if (mixing.rows() != config.d || mixing.cols() != config.latent_dim) {
    throw std::invalid_argument("make_ood_batch: mixing matrix shape mismatch");
  }
  Rng rng(seed);
  const Eigen::MatrixXd cov_root = spectral_sqrt(config.latent_cov);
  Eigen::MatrixXd latents = draw_normals(rng, m, config.latent_dim) * cov_root;
  if (shift != 0.0) {
    const Eigen::VectorXd offset =
        shift * config.latent_cov.diagonal().cwiseSqrt();
    latents.rowwise() += offset.transpose();
  }
  Eigen::MatrixXd x = latents * mixing.transpose() +
                      config.noise_sd * draw_normals(rng, m, config.d);
  return Sample(std::move(x));
}

ShiftCurve run_shift_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  const std::vector<DistanceKind> kinds = {DistanceKind::wasserstein(2.0),
                                           DistanceKind::kl(),
                                           DistanceKind::js()};
  const std::size_t n_kinds = kinds.size();
  const std::size_t n_shifts = config.shift_grid.size();
  const auto n_ood = static_cast<int>(std::lround(
      config.ood_fraction * static_cast<double>(config.n_batches)));
  const int n_id = config.n_batches - n_ood;

  std::vector<int> labels(static_cast<std::size_t>(config.n_batches));
  for (int b = 0; b < config.n_batches; ++b) {
    labels[static_cast<std::size_t>(b)] = b < n_id ? 0 : 1;
  }

  // aurocs[rep][kind][shift]
  std::vector<std::vector<std::vector<double>>> aurocs(
      static_cast<std::size_t>(config.reps),
      std::vector<std::vector<double>>(n_kinds,
                                       std::vector<double>(n_shifts, 0.0)));

  parallel_for(static_cast<std::size_t>(config.reps), threads,
               [&](std::size_t rep) {
    const std::uint64_t rep_seed = mix_seed(config.seed, rep);
    const FlData data = generate_fl_data(config, rep_seed);
    TestConfig tcfg;
    tcfg.alpha = config.alpha;
    tcfg.folds = config.folds;
    tcfg.batch_size = config.batch_size;
    tcfg.seed = mix_seed(rep_seed, kStreamCalibrate);
    const std::vector<Calibration> cals =
        calibrate_many(data.train, tcfg, config.latent_dim, kinds);
    const double root_m = std::sqrt(static_cast<double>(config.batch_size));

    for (std::size_t si = 0; si < n_shifts; ++si) {
      std::vector<std::vector<double>> scores(
          n_kinds,
          std::vector<double>(static_cast<std::size_t>(config.n_batches)));
      for (int b = 0; b < config.n_batches; ++b) {
        const bool is_ood = labels[static_cast<std::size_t>(b)] == 1;
        const double shift = is_ood ? config.shift_grid[si] : 0.0;
        const std::uint64_t batch_seed = mix_seed(
            mix_seed(rep_seed, kStreamBatches + si),
            static_cast<std::uint64_t>(b));
        const Sample batch = make_ood_batch(config, data.mixing, shift,
                                            config.batch_size, batch_seed);
        // One embedding serves all three statistics; the calibrations share
        // the same reference model.
        const GaussianParams embedded = embed_batch(cals[0], batch);
        for (std::size_t k = 0; k < n_kinds; ++k) {
          scores[k][static_cast<std::size_t>(b)] =
              root_m *
              gaussian_distance(cals[k].reference, embedded, kinds[k]);
        }
      }
      for (std::size_t k = 0; k < n_kinds; ++k) {
        aurocs[rep][k][si] = auroc({scores[k], labels});
      }
    }
  });

  ShiftCurve curve;
  for (std::size_t k = 0; k < n_kinds; ++k) {
    for (std::size_t si = 0; si < n_shifts; ++si) {
      std::vector<double> values(static_cast<std::size_t>(config.reps));
      for (std::size_t rep = 0; rep < values.size(); ++rep) {
        values[rep] = aurocs[rep][k][si];
      }
      ShiftCurveRow row;
      row.distance = kinds[k].name();
      row.shift = config.shift_grid[si];
      row.auroc_mean = mean_of(values);
      row.auroc_lo = empirical_quantile(values, 0.05);
      row.auroc_hi = empirical_quantile(values, 0.95);
      curve.rows.push_back(std::move(row));
    }
  }
  return curve;
}

std::string shift_curve_csv(const ShiftCurve& curve) {
  std::ostringstream out;
  out << "distance,shift,auroc_mean,auroc_lo,auroc_hi\n";
  for (const ShiftCurveRow& row : curve.rows) {
    out << row.distance << ',' << format_double(row.shift) << ','
        << format_double(row.auroc_mean) << ',' << format_double(row.auroc_lo)
        << ',' << format_double(row.auroc_hi) << '\n';
  }
  return out.str();
}

Empirical1D gaussian_quantile_grid(int points) {
  if (points < 2) {
    throw std::invalid_argument("gaussian_quantile_grid: need >= 2 points");
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        norm_quantile((static_cast<double>(i) + 0.5) /
                      static_cast<double>(points));
  }
  return Empirical1D::from_sorted(std::move(grid));
}

double scaled_statistic_1d(const Empirical1D& reference,
                           const Empirical1D& batch, double order) {
  return std::sqrt(static_cast<double>(batch.size())) *
         wasserstein_1d(reference, batch, order);
}

std::vector<PowerCurveRow> run_power_curve(const ExperimentConfig& config,
                                           const std::vector<int>& m_grid,
                                           double fixed_shift,
                                           double shift_decay,
                                           const HarnessOptions& options,
                                           int threads) {
  if (m_grid.empty()) {
    throw std::invalid_argument("run_power_curve: empty m grid");
  }
  const Empirical1D reference = gaussian_quantile_grid(options.ref_points);
  std::vector<PowerCurveRow> rows;
  rows.reserve(m_grid.size());
  for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
    const int m = m_grid[mi];
    if (m < 1) throw std::invalid_argument("run_power_curve: m must be >= 1");
    const double shift =
        shift_decay == 0.0
            ? fixed_shift
            : fixed_shift / std::pow(static_cast<double>(m), shift_decay);
    const NullCalibration cal = calibrate_1d(
        reference, m, config.alpha, options,
        mix_seed(config.seed, kStreamNull + 16 * mi), threads);
    const AltRun run = run_alternative_1d(
        reference, m, shift, cal.lambda, config.reps, options,
        mix_seed(config.seed, kStreamAlt + 16 * mi + 1), threads);
    PowerCurveRow row;
    row.m = m;
    row.shift = shift;
    row.delta_hat = run.delta_hat;
    row.lambda = cal.lambda;
    row.power = run.power;
    row.se = run.se;
    rows.push_back(row);
  }
  return rows;
}

std::string power_curve_csv(const std::vector<PowerCurveRow>& rows) {
  std::ostringstream out;
  out << "m,delta_hat,power,se\n";
  for (const PowerCurveRow& row : rows) {
    out << row.m << ',' << format_double(row.delta_hat) << ','
        << format_double(row.power) << ',' << format_double(row.se) << '\n';
  }
  return out.str();
}

BoundCheckResult run_bound_check(const ExperimentConfig& config,
                                 const std::vector<double>& phi_grid,
                                 const BoundCheckOptions& options,
                                 int threads) {
  if (phi_grid.empty()) {
    throw std::invalid_argument("run_bound_check: empty phi grid");
  }
  for (double phi : phi_grid) {
    if (!(phi > 0.0)) {
      throw std::invalid_argument("run_bound_check: phi' must be positive");
    }
  }
  const Empirical1D reference =
      gaussian_quantile_grid(options.harness.ref_points);
  BoundCheckResult result;
  std::vector<double> sorted_phi = phi_grid;
  std::sort(sorted_phi.begin(), sorted_phi.end());

  for (std::size_t mi = 0; mi < options.m_grid.size(); ++mi) {
    const int m = options.m_grid[mi];
    const NullCalibration cal = calibrate_1d(
        reference, m, config.alpha, options.harness,
        mix_seed(config.seed, kStreamNull + 64 * mi), threads);

    // Fixed alternatives: lower-bound rows wherever delta_hat >= lambda.
    for (std::size_t si = 0; si < options.shift_grid.size(); ++si) {
      const AltRun run = run_alternative_1d(
          reference, m, options.shift_grid[si], cal.lambda, config.reps,
          options.harness,
          mix_seed(config.seed, kStreamAlt + 64 * mi + 2 * si + 1), threads);
      if (run.delta_hat < cal.lambda) continue;
      for (double phi : sorted_phi) {
        const BoundParams params = BoundParams::make(
            options.harness.order, phi, run.delta_hat, cal.lambda);
        BoundReportRow row;
        row.regime = "lower";
        row.order = params.order;
        row.gamma = params.gamma;
        row.phi_prime = phi;
        row.delta_m = run.delta_hat;
        row.lambda = cal.lambda;
        row.bound = power_lower_bound(params);
        row.empirical_power = run.power;
        row.se = run.se;
        result.rows.push_back(std::move(row));
      }
    }

    // Vanishing c/sqrt(m) alternatives: intermediate rows where delta_hat < lambda.
    for (std::size_t ci = 0; ci < options.c_grid.size(); ++ci) {
      const double shift =
          options.c_grid[ci] / std::sqrt(static_cast<double>(m));
      const AltRun run = run_alternative_1d(
          reference, m, shift, cal.lambda, config.reps, options.harness,
          mix_seed(config.seed, kStreamAlt + 64 * mi + 32 + 2 * ci), threads);
      if (!(run.delta_hat < cal.lambda)) continue;
      for (double phi : sorted_phi) {
        const BoundParams params =
            BoundParams::make(options.harness.order, phi, run.delta_hat,
                              cal.lambda, run.delta_hat);
        BoundReportRow row;
        row.regime = "intermediate";
        row.order = params.order;
        row.gamma = params.gamma;
        row.phi_prime = phi;
        row.delta_m = run.delta_hat;
        row.lambda = cal.lambda;
        row.delta_limit = run.delta_hat;
        row.bound = power_upper_bound_intermediate(params);
        row.empirical_power = run.power;
        row.se = run.se;
        result.rows.push_back(std::move(row));
      }
    }
  }
  // Dominance is checked in ascending phi order across all lower-regime rows.
  for (double phi : sorted_phi) {
    bool fails = false;
    for (const BoundReportRow& row : result.rows) {
      if (row.regime == "lower" && row.phi_prime == phi &&
          row.empirical_power < row.bound - 3.0 * row.se) {
        fails = true;
        break;
      }
    }
    if (fails) {
      result.first_failing_phi = phi;
      break;
    }
  }
  return result;
}

SoftmaxPopulation generate_softmax_populations(int classes, int n_id,
                                               int n_ood,
                                               double concentration_id,
                                               double concentration_ood,
                                               std::uint64_t seed) {
  if (classes < 2) {
    throw std::invalid_argument(
        "generate_softmax_populations: need >= 2 classes");
  }
  if (n_id < 0 || n_ood < 0 || n_id + n_ood < 1) {
    throw std::invalid_argument(
        "generate_softmax_populations: need at least one sample");
  }
  if (!(concentration_id > 0.0) || !(concentration_ood > 0.0)) {
    throw std::invalid_argument(
        "generate_softmax_populations: concentrations must be positive");
  }
  SoftmaxPopulation population;
  population.vectors.reserve(static_cast<std::size_t>(n_id + n_ood));
  population.labels.reserve(static_cast<std::size_t>(n_id + n_ood));
  const auto draw = [classes](Rng& rng, double concentration) {
    std::vector<double> g(static_cast<std::size_t>(classes));
    double total = 0.0;
    for (double& v : g) {
      v = rng.gamma(concentration);
      total += v;
    }
    if (total <= 0.0) {
      // All components underflowed; fall back to uniform.
      for (double& v : g) v = 1.0;
      total = static_cast<double>(classes);
    }
    for (double& v : g) v /= total;
    return SoftmaxVector(std::move(g));
  };
  Rng rng_id(mix_seed(seed, 0));
  for (int i = 0; i < n_id; ++i) {
    population.vectors.push_back(draw(rng_id, concentration_id));
    population.labels.push_back(0);
  }
  Rng rng_ood(mix_seed(seed, 1));
  for (int i = 0; i < n_ood; ++i) {
    population.vectors.push_back(draw(rng_ood, concentration_ood));
    population.labels.push_back(1);
  }
  return population;
}

std::vector<DetectorSummaryRow> summarize_detectors(
    const SoftmaxPopulation& population, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("summarize_detectors: alpha must lie in (0,1)");
  }
  std::vector<DetectorSummaryRow> rows;
  for (DetectorKind kind : all_detectors()) {
    const std::vector<double> scores =
        score_population(population.vectors, kind);
    std::vector<double> id_scores;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (population.labels[i] == 0) id_scores.push_back(scores[i]);
    }
    if (id_scores.empty()) {
      throw std::invalid_argument(
          "summarize_detectors: population has no ID samples");
    }
    const double threshold = empirical_quantile(id_scores, 1.0 - alpha);
    const ScoredLabels data{scores, population.labels};
    const TprFpr rates = tpr_fpr_at(data, threshold);
    DetectorSummaryRow row;
    row.detector = detector_name(kind);
    row.auroc = auroc(data);
    row.tpr_at_alpha = rates.tpr;
    row.fpr_at_alpha = rates.fpr;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string detector_summary_csv(const std::vector<DetectorSummaryRow>& rows) {
  std::ostringstream out;
  out << "detector,auroc,tpr_at_alpha,fpr_at_alpha\n";
  for (const DetectorSummaryRow& row : rows) {
    out << row.detector << ',' << format_double(row.auroc) << ','
        << format_double(row.tpr_at_alpha) << ','
        << format_double(row.fpr_at_alpha) << '\n';
  }
  return out.str();
}

}  // namespace oodt
