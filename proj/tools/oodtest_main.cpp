// oodtest: reproducible drivers for the Wasserstein-distance OOD test.
//
// Subcommands: simulate, calibrate, test, power-curve, bound-check,
// detectors, roc. Every run writes a run_manifest.json with the resolved
// configuration, the seed, and a content hash per artifact.
//
// Exit codes: 0 success (or ID decision), 1 input error, 2 usage error,
// 3 OOD decision.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oodt/bounds.hpp"
#include "oodt/distances.hpp"
#include "oodt/io.hpp"
#include "oodt/metrics.hpp"
#include "oodt/simulation.hpp"
#include "oodt/testing.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitUsageError = 2;
constexpr int kExitOod = 3;

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const json& config, std::uint64_t seed,
                    const std::vector<std::string>& artifacts) {
  json manifest;
  manifest["schema_version"] = "1";
  manifest["subcommand"] = subcommand;
  manifest["config"] = config;
  manifest["seed"] = seed;
  json files = json::array();
  for (const std::string& path : artifacts) {
    const std::string bytes = oodt::read_text_file(path);
    files.push_back({{"path", std::filesystem::path(path).filename().string()},
                     {"bytes", bytes.size()},
                     {"fnv1a64", oodt::fnv1a64_hex(bytes)}});
  }
  manifest["artifacts"] = std::move(files);
  oodt::write_text_file(join_path(out_dir, "run_manifest.json"),
                        manifest.dump(2) + "\n");
}

json experiment_config_json(const oodt::ExperimentConfig& config) {
  json j;
  j["n"] = config.n;
  j["d"] = config.d;
  j["latent_dim"] = config.latent_dim;
  json cov = json::array();
  for (Eigen::Index i = 0; i < config.latent_cov.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < config.latent_cov.cols(); ++c) {
      row.push_back(config.latent_cov(i, c));
    }
    cov.push_back(std::move(row));
  }
  j["latent_cov"] = std::move(cov);
  j["noise_sd"] = config.noise_sd;
  j["batch_size"] = config.batch_size;
  j["n_batches"] = config.n_batches;
  j["ood_fraction"] = config.ood_fraction;
  j["shift_grid"] = config.shift_grid;
  j["reps"] = config.reps;
  j["alpha"] = config.alpha;
  j["folds"] = config.folds;
  j["seed"] = config.seed;
  return j;
}

struct CommonExperimentFlags {
  oodt::ExperimentConfig config;
  std::vector<double> latent_cov_flat;
  int threads = 1;
  std::string out_dir = ".";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--n", config.n, "Training sample size");
    cmd->add_option("--d", config.d, "Ambient feature dimension");
    cmd->add_option("--latent-dim", config.latent_dim, "Latent dimension");
    cmd->add_option("--latent-cov", latent_cov_flat,
                    "Latent covariance, row-major")
        ->delimiter(',');
    cmd->add_option("--noise-sd", config.noise_sd, "Ambient noise sd");
    cmd->add_option("--batch-size", config.batch_size, "Test batch size m");
    cmd->add_option("--n-batches", config.n_batches, "Batches per shift");
    cmd->add_option("--ood-fraction", config.ood_fraction,
                    "OOD prevalence among batches");
    cmd->add_option("--shift-grid", config.shift_grid,
                    "Comma-separated latent shifts (in sd units)")
        ->delimiter(',');
    cmd->add_option("--reps", config.reps, "Monte Carlo repetitions");
    cmd->add_option("--alpha", config.alpha, "Type-I error level");
    cmd->add_option("--folds", config.folds, "Calibration folds K");
    cmd->add_option("--seed", config.seed, "Master seed");
    cmd->add_option("--threads", threads, "Worker thread cap");
    cmd->add_option("--out-dir", out_dir, "Output directory");
  }

  void resolve() {
    if (!latent_cov_flat.empty()) {
      const auto p = static_cast<Eigen::Index>(config.latent_dim);
      if (static_cast<Eigen::Index>(latent_cov_flat.size()) != p * p) {
        throw std::runtime_error(
            "--latent-cov needs latent_dim^2 row-major entries");
      }
      Eigen::MatrixXd cov(p, p);
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
          cov(i, j) = latent_cov_flat[static_cast<std::size_t>(i * p + j)];
        }
      }
      config.latent_cov = std::move(cov);
    } else if (config.latent_dim !=
               static_cast<int>(config.latent_cov.rows())) {
      config.latent_cov = Eigen::MatrixXd::Identity(config.latent_dim,
                                                    config.latent_dim);
    }
    std::filesystem::create_directories(out_dir);
  }
};

int run_simulate(CommonExperimentFlags& flags) {
  flags.resolve();
  const oodt::ShiftCurve curve =
      oodt::run_shift_experiment(flags.config, flags.threads);
  const std::string csv_path = join_path(flags.out_dir, "shift_curve.csv");
  oodt::write_text_file(csv_path, oodt::shift_curve_csv(curve));
  write_manifest(flags.out_dir, "simulate",
                 experiment_config_json(flags.config), flags.config.seed,
                 {csv_path});
  std::cout << "wrote " << csv_path << " (" << curve.rows.size() << " rows)\n";
  return kExitOk;
}

struct CalibrateFlags {
  std::string train_path;
  std::string out = "calibration.json";
  std::string out_dir = ".";
  std::string distance = "wasserstein";
  double order = 2.0;
  int latent_dim = 2;
  oodt::TestConfig config;
};

int run_calibrate(CalibrateFlags& flags) {
  std::filesystem::create_directories(flags.out_dir);
  const oodt::Sample train = oodt::read_sample_csv(flags.train_path);
  flags.config.distance = oodt::DistanceKind::parse(flags.distance, flags.order);
  const oodt::Calibration cal =
      oodt::calibrate(train, flags.config, flags.latent_dim);
  const std::string cal_path = join_path(flags.out_dir, flags.out);
  oodt::save_calibration(cal, cal_path);
  json config;
  config["train"] = flags.train_path;
  config["alpha"] = flags.config.alpha;
  config["distance"] = flags.config.distance.name();
  config["order"] = flags.config.distance.order;
  config["folds"] = flags.config.folds;
  config["latent_dim"] = flags.latent_dim;
  config["split_fraction"] = flags.config.split_fraction;
  write_manifest(flags.out_dir, "calibrate", config, flags.config.seed,
                 {cal_path});
  std::cout << "lambda=" << oodt::format_double(cal.lambda) << '\n';
  return kExitOk;
}

struct TestFlags {
  std::string cal_path;
  std::string batch_path;
  std::string out_dir = ".";
};

int run_test(TestFlags& flags) {
  std::filesystem::create_directories(flags.out_dir);
  const oodt::Calibration cal = oodt::load_calibration(flags.cal_path);
  const oodt::Sample batch = oodt::read_sample_csv(flags.batch_path);
  const oodt::TestOutcome outcome = oodt::test_statistic(cal, batch);
  std::cout << oodt::format_double(outcome.statistic) << ','
            << oodt::format_double(outcome.lambda_used) << ','
            << outcome.decision() << '\n';
  json record;
  record["statistic"] = outcome.statistic;
  record["lambda"] = outcome.lambda_used;
  record["decision"] = outcome.decision();
  record["m"] = outcome.batch_size;
  const std::string record_path = join_path(flags.out_dir, "test_result.json");
  oodt::write_text_file(record_path, record.dump(2) + "\n");
  json config;
  config["cal"] = flags.cal_path;
  config["batch"] = flags.batch_path;
  write_manifest(flags.out_dir, "test", config, cal.config.seed,
                 {record_path});
  return outcome.ood ? kExitOod : kExitOk;
}

struct PowerCurveFlags {
  CommonExperimentFlags common;
  std::vector<int> m_grid = {10, 50, 200, 1000};
  double shift = 0.5;
  double shift_decay = 0.0;
  oodt::HarnessOptions harness;
};

int run_power_curve_cmd(PowerCurveFlags& flags) {
  flags.common.resolve();
  const auto rows = oodt::run_power_curve(flags.common.config, flags.m_grid,
                                          flags.shift, flags.shift_decay,
                                          flags.harness, flags.common.threads);
  const std::string csv_path =
      join_path(flags.common.out_dir, "power_curve.csv");
  oodt::write_text_file(csv_path, oodt::power_curve_csv(rows));
  json config = experiment_config_json(flags.common.config);
  config["m_grid"] = flags.m_grid;
  config["shift"] = flags.shift;
  config["shift_decay"] = flags.shift_decay;
  config["order"] = flags.harness.order;
  config["ref_points"] = flags.harness.ref_points;
  config["cal_batches"] = flags.harness.cal_batches;
  write_manifest(flags.common.out_dir, "power-curve", config,
                 flags.common.config.seed, {csv_path});
  for (const auto& row : rows) {
    std::cout << "m=" << row.m << " power=" << row.power
              << " delta_hat=" << oodt::format_double(row.delta_hat) << '\n';
  }
  return kExitOk;
}

struct BoundCheckFlags {
  CommonExperimentFlags common;
  std::vector<double> phi_grid = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  oodt::BoundCheckOptions options;
};

int run_bound_check_cmd(BoundCheckFlags& flags) {
  flags.common.resolve();
  const oodt::BoundCheckResult result =
      oodt::run_bound_check(flags.common.config, flags.phi_grid,
                            flags.options, flags.common.threads);
  const std::string csv_path =
      join_path(flags.common.out_dir, "bound_check.csv");
  oodt::write_text_file(csv_path, oodt::bound_report_csv(result.rows));
  json config = experiment_config_json(flags.common.config);
  config["phi_grid"] = flags.phi_grid;
  config["m_grid"] = flags.options.m_grid;
  config["shift_grid_1d"] = flags.options.shift_grid;
  config["c_grid"] = flags.options.c_grid;
  config["order"] = flags.options.harness.order;
  config["ref_points"] = flags.options.harness.ref_points;
  config["cal_batches"] = flags.options.harness.cal_batches;
  config["assume_t2"] = true;
  write_manifest(flags.common.out_dir, "bound-check", config,
                 flags.common.config.seed, {csv_path});
  std::cout << "note: bounds assume the T2 transport inequality for the "
               "sampling distribution (phi' is a free constant; asymptotic "
               "constants N0, d' are not modeled)\n";
  if (result.first_failing_phi) {
    std::cout << "lower-bound dominance first fails at phi'="
              << oodt::format_double(*result.first_failing_phi) << '\n';
  } else {
    std::cout << "lower-bound dominance holds for every phi' in the grid\n";
  }
  std::cout << "wrote " << csv_path << " (" << result.rows.size()
            << " rows)\n";
  return kExitOk;
}

struct DetectorFlags {
  std::string softmax_path;
  bool synthetic = false;
  int classes = 10;
  int n_id = 500;
  int n_ood = 500;
  double concentration_id = 0.3;
  double concentration_ood = 3.0;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

int run_detectors(DetectorFlags& flags) {
  std::filesystem::create_directories(flags.out_dir);
  oodt::SoftmaxPopulation population;
  if (flags.synthetic) {
    population = oodt::generate_softmax_populations(
        flags.classes, flags.n_id, flags.n_ood, flags.concentration_id,
        flags.concentration_ood, flags.seed);
  } else if (!flags.softmax_path.empty()) {
    const oodt::LabeledSoftmax data =
        oodt::read_softmax_csv(flags.softmax_path);
    population.vectors = data.vectors;
    population.labels = data.labels;
  } else {
    throw std::runtime_error("detectors: pass --softmax FILE or --synthetic");
  }
  const auto rows = oodt::summarize_detectors(population, flags.alpha);
  const std::string csv_path =
      join_path(flags.out_dir, "detector_summary.csv");
  oodt::write_text_file(csv_path, oodt::detector_summary_csv(rows));
  json config;
  config["alpha"] = flags.alpha;
  if (flags.synthetic) {
    config["synthetic"] = true;
    config["classes"] = flags.classes;
    config["n_id"] = flags.n_id;
    config["n_ood"] = flags.n_ood;
    config["concentration_id"] = flags.concentration_id;
    config["concentration_ood"] = flags.concentration_ood;
  } else {
    config["softmax"] = flags.softmax_path;
  }
  write_manifest(flags.out_dir, "detectors", config, flags.seed, {csv_path});
  std::cout << "threshold column is the (1-alpha) quantile of ID scores\n";
  for (const auto& row : rows) {
    std::cout << row.detector << " auroc=" << row.auroc << '\n';
  }
  return kExitOk;
}

struct RocFlags {
  std::string scores_path;
  std::string out_dir = ".";
};

int run_roc(RocFlags& flags) {
  std::filesystem::create_directories(flags.out_dir);
  const oodt::ScoredLabels data = oodt::read_scored_csv(flags.scores_path);
  const auto points = oodt::roc_curve(data);
  std::ostringstream csv;
  csv << "threshold,fpr,tpr\n";
  for (const auto& point : points) {
    csv << oodt::format_double(point.threshold) << ','
        << oodt::format_double(point.fpr) << ','
        << oodt::format_double(point.tpr) << '\n';
  }
  const std::string csv_path = join_path(flags.out_dir, "roc_curve.csv");
  oodt::write_text_file(csv_path, csv.str());
  json config;
  config["scores"] = flags.scores_path;
  write_manifest(flags.out_dir, "roc", config, 0, {csv_path});
  std::cout << "auroc=" << oodt::format_double(oodt::auroc(data)) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein-distance out-of-distribution testing toolkit"};
  app.require_subcommand(1);

  CommonExperimentFlags simulate_flags;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Shift experiment: AUROC vs latent shift (shift_curve.csv)");
  simulate_flags.add_to(simulate);

  CalibrateFlags calibrate_flags;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Calibrate a test on training CSV data");
  calibrate->add_option("--train", calibrate_flags.train_path,
                        "Training sample CSV")
      ->required();
  calibrate->add_option("--alpha", calibrate_flags.config.alpha,
                        "Type-I error level");
  calibrate->add_option("--distance", calibrate_flags.distance,
                        "wasserstein|kl|js");
  calibrate->add_option("--order", calibrate_flags.order, "Wasserstein order");
  calibrate->add_option("--folds", calibrate_flags.config.folds,
                        "Calibration folds K");
  calibrate->add_option("--latent-dim", calibrate_flags.latent_dim,
                        "Latent dimension (0 = ambient Gaussian fit)");
  calibrate->add_option("--split-fraction",
                        calibrate_flags.config.split_fraction,
                        "Train part of each calibration split");
  calibrate->add_option("--batch-size", calibrate_flags.config.batch_size,
                        "Expected test batch size");
  calibrate->add_option("--seed", calibrate_flags.config.seed, "Master seed");
  calibrate->add_option("--out", calibrate_flags.out,
                        "Calibration artifact filename");
  calibrate->add_option("--out-dir", calibrate_flags.out_dir,
                        "Output directory");

  TestFlags test_flags;
  CLI::App* test =
      app.add_subcommand("test", "Decide ID/OOD for one batch CSV");
  test->add_option("--cal", test_flags.cal_path, "Calibration JSON")
      ->required();
  test->add_option("--batch", test_flags.batch_path, "Batch sample CSV")
      ->required();
  test->add_option("--out-dir", test_flags.out_dir, "Output directory");

  PowerCurveFlags power_flags;
  CLI::App* power_curve = app.add_subcommand(
      "power-curve", "1-D empirical power vs batch size (power_curve.csv)");
  power_flags.common.add_to(power_curve);
  power_curve->add_option("--m-grid", power_flags.m_grid, "Batch sizes")
      ->delimiter(',');
  power_curve->add_option("--shift", power_flags.shift,
                          "Alternative mean shift");
  power_curve->add_option("--shift-decay", power_flags.shift_decay,
                          "shift_m = shift / m^decay");
  power_curve->add_option("--order", power_flags.harness.order,
                          "Wasserstein order");
  power_curve->add_option("--ref-points", power_flags.harness.ref_points,
                          "Reference quantile-grid size");
  power_curve->add_option("--cal-batches", power_flags.harness.cal_batches,
                          "Null batches per lambda calibration");

  BoundCheckFlags bound_flags;
  CLI::App* bound_check = app.add_subcommand(
      "bound-check", "Power bounds vs Monte Carlo (bound_check.csv)");
  bound_flags.common.add_to(bound_check);
  bound_check->add_option("--phi-grid", bound_flags.phi_grid, "phi' grid")
      ->delimiter(',');
  bound_check->add_option("--m-grid", bound_flags.options.m_grid,
                          "Batch sizes")
      ->delimiter(',');
  bound_check->add_option("--shift-grid-1d", bound_flags.options.shift_grid,
                          "Fixed alternative shifts")
      ->delimiter(',');
  bound_check->add_option("--c-grid", bound_flags.options.c_grid,
                          "Intermediate-regime constants (shift = c/sqrt(m))")
      ->delimiter(',');
  bound_check->add_option("--order", bound_flags.options.harness.order,
                          "Wasserstein order");
  bound_check->add_option("--ref-points",
                          bound_flags.options.harness.ref_points,
                          "Reference quantile-grid size");
  bound_check->add_option("--cal-batches",
                          bound_flags.options.harness.cal_batches,
                          "Null batches per lambda calibration");

  DetectorFlags detector_flags;
  CLI::App* detectors = app.add_subcommand(
      "detectors", "Compare the four softmax OOD detectors");
  detectors->add_option("--softmax", detector_flags.softmax_path,
                        "Labeled softmax CSV (p0,...,label)");
  detectors->add_flag("--synthetic", detector_flags.synthetic,
                      "Generate synthetic softmax populations");
  detectors->add_option("--classes", detector_flags.classes, "Class count");
  detectors->add_option("--n-id", detector_flags.n_id, "ID sample count");
  detectors->add_option("--n-ood", detector_flags.n_ood, "OOD sample count");
  detectors->add_option("--concentration-id", detector_flags.concentration_id,
                        "Dirichlet concentration of ID softmaxes");
  detectors->add_option("--concentration-ood",
                        detector_flags.concentration_ood,
                        "Dirichlet concentration of OOD softmaxes");
  detectors->add_option("--alpha", detector_flags.alpha, "Type-I error level");
  detectors->add_option("--seed", detector_flags.seed, "Master seed");
  detectors->add_option("--out-dir", detector_flags.out_dir,
                        "Output directory");

  RocFlags roc_flags;
  CLI::App* roc =
      app.add_subcommand("roc", "ROC curve + AUROC from a scored CSV");
  roc->add_option("--scores", roc_flags.scores_path, "CSV with score,label")
      ->required();
  roc->add_option("--out-dir", roc_flags.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (simulate->parsed()) return run_simulate(simulate_flags);
    if (calibrate->parsed()) return run_calibrate(calibrate_flags);
    if (test->parsed()) return run_test(test_flags);
    if (power_curve->parsed()) return run_power_curve_cmd(power_flags);
    if (bound_check->parsed()) return run_bound_check_cmd(bound_flags);
    if (detectors->parsed()) return run_detectors(detector_flags);
    if (roc->parsed()) return run_roc(roc_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitUsageError;
}
