#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "oodt/detectors.hpp"
#include "oodt/io.hpp"
#include "oodt/metrics.hpp"
#include "oodt/rng.hpp"
#include "oodt/simulation.hpp"

using namespace oodt;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs the CLI binary, capturing stdout (stderr folded in).
RunResult run_cli(const std::string& args) {
  const std::string command = std::string(OODTEST_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  while (std::size_t got = std::fread(buffer, 1, sizeof(buffer), pipe)) {
    result.output.append(buffer, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir =
      std::filesystem::temp_directory_path() / "oodt_cli_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("csv round trips preserve every bit") {
  Rng rng(1);
  Eigen::MatrixXd values(7, 3);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      values(i, j) = std::exp(40.0 * (rng.uniform() - 0.5)) *
                     (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
  }
  values(0, 0) = 0.1;  // classic non-representable decimal
  values(1, 1) = 1e-300;
  const Sample sample(values);
  const Sample restored = sample_from_csv(sample_to_csv(sample));
  CHECK((restored.values() - sample.values()).cwiseAbs().maxCoeff() == 0.0);

  const DiscretePmf pmf({-1.5, 0.0, 2.25}, {0.25, 0.5, 0.25});
  const DiscretePmf pmf_restored = pmf_from_csv(pmf_to_csv(pmf));
  CHECK(pmf_restored.support() == pmf.support());
  CHECK(pmf_restored.weights() == pmf.weights());
}

TEST_CASE("csv errors carry row and column diagnostics") {
  CHECK_THROWS_WITH_AS(sample_from_csv("f0,f1\n1.0,2.0\n3.0,oops\n"),
                       doctest::Contains("row 3"), std::runtime_error);
  CHECK_THROWS_AS(sample_from_csv("f0,f1\n1.0\n"), std::runtime_error);
  CHECK_THROWS_AS(sample_from_csv(""), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      softmax_from_csv("p0,p1,label\n0.9,0.3,0\n"),
      doctest::Contains("row 2"), std::runtime_error);
  CHECK_THROWS_AS(softmax_from_csv("p0,p1,label\n0.5,0.5,2\n"),
                  std::runtime_error);
}

TEST_CASE("labeled softmax csv round trip") {
  const SoftmaxPopulation population =
      generate_softmax_populations(5, 8, 8, 0.4, 3.0, 9);
  LabeledSoftmax data;
  data.vectors = population.vectors;
  data.labels = population.labels;
  const LabeledSoftmax restored = softmax_from_csv(softmax_to_csv(data));
  REQUIRE(restored.vectors.size() == data.vectors.size());
  CHECK(restored.labels == data.labels);
  // Construction renormalizes the unit-sum residual, so entries can move by
  // one ulp; what must survive the round trip is every detector score.
  for (std::size_t i = 0; i < data.vectors.size(); ++i) {
    for (std::size_t c = 0; c < data.vectors[i].classes(); ++c) {
      CHECK(restored.vectors[i].probs()[c] ==
            doctest::Approx(data.vectors[i].probs()[c]).epsilon(1e-14));
    }
    for (DetectorKind kind : all_detectors()) {
      CHECK(detector_score(restored.vectors[i], kind) ==
            doctest::Approx(detector_score(data.vectors[i], kind))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("no-such-command").exit_code == 2);
  CHECK(run_cli("calibrate").exit_code == 2);  // missing required --train
  CHECK(run_cli("simulate --no-such-flag 1").exit_code == 2);
}

TEST_CASE("calibrate then test: ID exits 0, OOD exits 3") {
  const auto dir = scratch_dir("calibrate_test");
  ExperimentConfig config;
  config.n = 200;
  config.d = 12;
  config.latent_dim = 2;
  config.seed = 17;
  const FlData data = generate_fl_data(config, 17);
  write_sample_csv(data.train, (dir / "train.csv").string());
  const RunResult cal = run_cli("calibrate --train " +
                                (dir / "train.csv").string() +
                                " --latent-dim 2 --folds 50 --seed 3 " +
                                "--out-dir " + (dir / "cal").string());
  CHECK(cal.exit_code == 0);
  CHECK(cal.output.find("lambda=") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "cal" / "calibration.json"));
  CHECK(std::filesystem::exists(dir / "cal" / "run_manifest.json"));

  const Sample id_batch = make_ood_batch(config, data.mixing, 0.0, 40, 100);
  write_sample_csv(id_batch, (dir / "id_batch.csv").string());
  const RunResult id_run =
      run_cli("test --cal " + (dir / "cal" / "calibration.json").string() +
              " --batch " + (dir / "id_batch.csv").string() + " --out-dir " +
              (dir / "t1").string());
  CHECK(id_run.exit_code == 0);
  CHECK(id_run.output.find(",ID") != std::string::npos);

  const Sample ood_batch = make_ood_batch(config, data.mixing, 2.0, 40, 101);
  write_sample_csv(ood_batch, (dir / "ood_batch.csv").string());
  const RunResult ood_run =
      run_cli("test --cal " + (dir / "cal" / "calibration.json").string() +
              " --batch " + (dir / "ood_batch.csv").string() + " --out-dir " +
              (dir / "t2").string());
  CHECK(ood_run.exit_code == 3);
  CHECK(ood_run.output.find(",OOD") != std::string::npos);

  SUBCASE("manifest hashes match the artifact bytes") {
    const std::string manifest =
        read_text_file((dir / "cal" / "run_manifest.json").string());
    const std::string artifact =
        read_text_file((dir / "cal" / "calibration.json").string());
    CHECK(manifest.find(fnv1a64_hex(artifact)) != std::string::npos);
    CHECK(manifest.find("\"schema_version\": \"1\"") != std::string::npos);
  }
}

TEST_CASE("input errors exit with code 1") {
  const auto dir = scratch_dir("input_errors");
  CHECK(run_cli("test --cal /nonexistent.json --batch /nonexistent.csv "
                "--out-dir " + (dir / "x").string()).exit_code == 1);
  write_text_file((dir / "empty.csv").string(), "");
  CHECK(run_cli("calibrate --train " + (dir / "empty.csv").string() +
                " --out-dir " + (dir / "y").string()).exit_code == 1);
  write_text_file((dir / "bad.csv").string(), "f0,f1\n1.0,nope\n");
  CHECK(run_cli("calibrate --train " + (dir / "bad.csv").string() +
                " --out-dir " + (dir / "z").string()).exit_code == 1);

  // cmd_test with an empty batch file must also fail cleanly.
  ExperimentConfig config;
  config.n = 120;
  config.d = 10;
  config.latent_dim = 2;
  const FlData data = generate_fl_data(config, 55);
  write_sample_csv(data.train, (dir / "train.csv").string());
  const RunResult cal = run_cli("calibrate --train " +
                                (dir / "train.csv").string() +
                                " --latent-dim 2 --folds 20 --out-dir " +
                                (dir / "cal").string());
  REQUIRE(cal.exit_code == 0);
  const RunResult empty_batch =
      run_cli("test --cal " + (dir / "cal" / "calibration.json").string() +
              " --batch " + (dir / "empty.csv").string() + " --out-dir " +
              (dir / "w").string());
  CHECK(empty_batch.exit_code == 1);
}

TEST_CASE("simulate runs are byte-identical per seed") {
  const auto dir = scratch_dir("simulate_repro");
  const std::string flags =
      " --n 120 --d 10 --reps 1 --folds 20 --n-batches 16 --batch-size 40 "
      "--shift-grid 0,0.5 --seed 7";
  const RunResult first =
      run_cli("simulate" + flags + " --out-dir " + (dir / "a").string());
  CHECK(first.exit_code == 0);
  const RunResult second =
      run_cli("simulate" + flags + " --out-dir " + (dir / "b").string());
  CHECK(second.exit_code == 0);
  CHECK(read_text_file((dir / "a" / "shift_curve.csv").string()) ==
        read_text_file((dir / "b" / "shift_curve.csv").string()));

  SUBCASE("single-point shift grid stays uninformative") {
    const RunResult null_run = run_cli(
        "simulate --n 120 --d 10 --reps 2 --folds 20 --n-batches 30 "
        "--batch-size 40 --shift-grid 0 --seed 9 --out-dir " +
        (dir / "null").string());
    CHECK(null_run.exit_code == 0);
    const std::string csv =
        read_text_file((dir / "null" / "shift_curve.csv").string());
    // Three rows (one per distance), all near 0.5.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    int rows = 0;
    while (std::getline(lines, line)) {
      const auto second_comma = line.find(',', line.find(',') + 1);
      const double mean = std::stod(line.substr(second_comma + 1));
      CHECK(mean > 0.3);
      CHECK(mean < 0.7);
      ++rows;
    }
    CHECK(rows == 3);
  }
}

TEST_CASE("roc subcommand round-trips scores") {
  const auto dir = scratch_dir("roc");
  Rng rng(23);
  ScoredLabels data;
  for (int i = 0; i < 40; ++i) {
    data.scores.push_back(rng.normal() + (i % 2 == 0 ? 0.8 : 0.0));
    data.labels.push_back(i % 2 == 0 ? 1 : 0);
  }
  write_text_file((dir / "scores.csv").string(), scored_to_csv(data));
  const RunResult run = run_cli("roc --scores " +
                                (dir / "scores.csv").string() + " --out-dir " +
                                (dir / "out").string());
  CHECK(run.exit_code == 0);
  const std::string printed = run.output;
  REQUIRE(printed.find("auroc=") != std::string::npos);
  const double reported =
      std::stod(printed.substr(printed.find("auroc=") + 6));
  CHECK(reported == doctest::Approx(auroc(data)).epsilon(1e-12));
  const std::string roc_csv =
      read_text_file((dir / "out" / "roc_curve.csv").string());
  CHECK(roc_csv.rfind("threshold,fpr,tpr\n", 0) == 0);
  // Re-ingest and integrate: trapezoid area equals the reported auroc.
  std::istringstream lines(roc_csv);
  std::string line;
  std::getline(lines, line);
  double area = 0.0;
  double prev_fpr = 0.0;
  double prev_tpr = 0.0;
  bool first_row = true;
  while (std::getline(lines, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double fpr = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const double tpr = std::stod(line.substr(c2 + 1));
    if (!first_row) {
      area += 0.5 * (tpr + prev_tpr) * (fpr - prev_fpr);
    }
    prev_fpr = fpr;
    prev_tpr = tpr;
    first_row = false;
  }
  CHECK(area == doctest::Approx(auroc(data)).epsilon(1e-12));
}

TEST_CASE("detectors subcommand on synthetic and file input") {
  const auto dir = scratch_dir("detectors");
  const RunResult synthetic = run_cli(
      "detectors --synthetic --classes 10 --n-id 200 --n-ood 200 "
      "--concentration-id 0.2 --concentration-ood 5.0 --seed 11 --out-dir " +
      (dir / "syn").string());
  CHECK(synthetic.exit_code == 0);
  const std::string csv =
      read_text_file((dir / "syn" / "detector_summary.csv").string());
  CHECK(csv.rfind("detector,auroc,tpr_at_alpha,fpr_at_alpha\n", 0) == 0);
  CHECK(csv.find("max_softmax") != std::string::npos);
  CHECK(csv.find("wasserstein_uniform") != std::string::npos);

  const SoftmaxPopulation population =
      generate_softmax_populations(6, 50, 50, 0.3, 3.0, 12);
  LabeledSoftmax file_data;
  file_data.vectors = population.vectors;
  file_data.labels = population.labels;
  write_text_file((dir / "softmax.csv").string(), softmax_to_csv(file_data));
  const RunResult from_file =
      run_cli("detectors --softmax " + (dir / "softmax.csv").string() +
              " --out-dir " + (dir / "file").string());
  CHECK(from_file.exit_code == 0);

  write_text_file((dir / "broken.csv").string(), "p0,p1,label\n0.9,0.6,0\n");
  const RunResult broken =
      run_cli("detectors --softmax " + (dir / "broken.csv").string() +
              " --out-dir " + (dir / "broken").string());
  CHECK(broken.exit_code == 1);
  CHECK(broken.output.find("row 2") != std::string::npos);
}

TEST_CASE("power-curve and bound-check write their csv artifacts") {
  const auto dir = scratch_dir("harness");
  const RunResult power = run_cli(
      "power-curve --m-grid 10,50 --shift 0.5 --reps 60 --cal-batches 200 "
      "--ref-points 512 --seed 5 --out-dir " + (dir / "p").string());
  CHECK(power.exit_code == 0);
  const std::string power_csv =
      read_text_file((dir / "p" / "power_curve.csv").string());
  CHECK(power_csv.rfind("m,delta_hat,power,se\n", 0) == 0);
  CHECK(std::filesystem::exists(dir / "p" / "run_manifest.json"));

  const RunResult bound = run_cli(
      "bound-check --m-grid 50 --shift-grid-1d 0.8 --c-grid 1.0 "
      "--phi-grid 1.0 --reps 60 --cal-batches 200 --ref-points 512 --seed 5 "
      "--out-dir " + (dir / "b").string());
  CHECK(bound.exit_code == 0);
  CHECK(bound.output.find("assume") != std::string::npos);
  const std::string bound_csv =
      read_text_file((dir / "b" / "bound_check.csv").string());
  CHECK(bound_csv.rfind("regime,p,gamma_p,", 0) == 0);
}

}  // TEST_SUITE
