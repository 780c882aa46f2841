#include "oodt/testing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "oodt/io.hpp"
#include "oodt/mathutil.hpp"
#include "oodt/rng.hpp"

namespace oodt {

namespace {

using nlohmann::json;

// Fisher-Yates with our own Rng so shuffles are platform-stable.
std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

Sample take_rows(const Eigen::MatrixXd& x,
                 const std::vector<Eigen::Index>& order, std::size_t begin,
                 std::size_t count) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), x.cols());
  for (std::size_t r = 0; r < count; ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(order[begin + r]);
  }
  return Sample(std::move(out));
}

GaussianParams embed(const std::optional<FactorModel>& model,
                     const Sample& batch) {
  if (model) return latent_posterior(*model, batch);
  return fit_gaussian(batch, kDefaultCovReg);
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols =
      rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : Eigen::Index{0};
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::runtime_error("calibration JSON: ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

}  // namespace

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("TestConfig: alpha must lie in (0, 1)");
  }
  if (folds < 1) {
    throw std::invalid_argument("TestConfig: folds must be positive");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("TestConfig: batch_size must be positive");
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument(
        "TestConfig: split_fraction must lie in (0, 1)");
  }
}

std::vector<Calibration> calibrate_many(
    const Sample& train, const TestConfig& config, int latent_dim,
    const std::vector<DistanceKind>& kinds) {
  config.validate();
  if (latent_dim < 0) {
    throw std::invalid_argument("calibrate: latent_dim must be >= 0");
  }
  if (kinds.empty()) {
    throw std::invalid_argument("calibrate: need at least one distance kind");
  }
  const Eigen::Index n = train.rows();
  const auto n_fit = static_cast<Eigen::Index>(
      std::floor(config.split_fraction * static_cast<double>(n)));
  const Eigen::Index m_val = n - n_fit;
  const Eigen::Index min_part =
      std::max<Eigen::Index>(2, 2 * std::max(latent_dim, 1));
  if (n_fit < min_part || m_val < min_part) {
    throw std::invalid_argument(
        "calibrate: train too small for the requested split (fit part " +
        std::to_string(n_fit) + ", validation part " + std::to_string(m_val) +
        ", need >= " + std::to_string(min_part) + " each)");
  }
  if (latent_dim > 0 && latent_dim >= train.cols()) {
    throw std::invalid_argument(
        "calibrate: latent_dim must be smaller than the feature dimension");
  }

  const double scale = std::sqrt(static_cast<double>(m_val));
  std::vector<std::vector<double>> distances(
      kinds.size(), std::vector<double>(static_cast<std::size_t>(config.folds)));
  for (int fold = 0; fold < config.folds; ++fold) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(fold)));
    const auto order = shuffled_indices(n, rng);
    const Sample fit_part = take_rows(train.values(), order, 0,
                                      static_cast<std::size_t>(n_fit));
    const Sample val_part =
        take_rows(train.values(), order, static_cast<std::size_t>(n_fit),
                  static_cast<std::size_t>(m_val));
    std::optional<FactorModel> fold_model;
    if (latent_dim > 0) fold_model = fit_factor_model(fit_part, latent_dim);
    const GaussianParams fit_ref = embed(fold_model, fit_part);
    const GaussianParams val_ref = embed(fold_model, val_part);
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      distances[k][static_cast<std::size_t>(fold)] =
          scale * gaussian_distance(fit_ref, val_ref, kinds[k]);
    }
  }

  std::optional<FactorModel> full_model;
  if (latent_dim > 0) full_model = fit_factor_model(train, latent_dim);
  GaussianParams reference = embed(full_model, train);

  std::vector<Calibration> out;
  out.reserve(kinds.size());
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    TestConfig cfg = config;
    cfg.distance = kinds[k];
    Calibration cal{cfg, full_model, reference,
                    empirical_quantile(distances[k], 1.0 - config.alpha),
                    static_cast<int>(m_val), std::move(distances[k])};
    out.push_back(std::move(cal));
  }
  return out;
}

Calibration calibrate(const Sample& train, const TestConfig& config,
                      int latent_dim) {
  return std::move(
      calibrate_many(train, config, latent_dim, {config.distance}).front());
}

GaussianParams embed_batch(const Calibration& cal, const Sample& batch) {
  return embed(cal.model, batch);
}

TestOutcome test_statistic(const Calibration& cal, const Sample& batch) {
  const Eigen::Index expected =
      cal.model ? cal.model->mu.size() : cal.reference.dim();
  if (batch.cols() != expected) {
    throw std::invalid_argument("test_statistic: batch has " +
                                std::to_string(batch.cols()) +
                                " features, calibration expects " +
                                std::to_string(expected));
  }
  const auto m = static_cast<double>(batch.rows());
  const GaussianParams embedded = embed_batch(cal, batch);
  const double distance =
      gaussian_distance(cal.reference, embedded, cal.config.distance);
  TestOutcome outcome;
  outcome.batch_size = static_cast<int>(batch.rows());
  outcome.statistic = std::sqrt(m) * distance;
  outcome.lambda_used =
      cal.lambda * std::sqrt(m / static_cast<double>(cal.cal_batch_size));
  outcome.ood = outcome.statistic > outcome.lambda_used;
  return outcome;
}

PowerEstimate power_estimate(
    const Calibration& cal,
    const std::function<Sample(std::uint64_t)>& make_batch, int reps,
    std::uint64_t seed) {
  if (reps < 1) {
    throw std::invalid_argument("power_estimate: reps must be positive");
  }
  int rejected = 0;
  for (int r = 0; r < reps; ++r) {
    const Sample batch = make_batch(mix_seed(seed, static_cast<std::uint64_t>(r)));
    if (test_statistic(cal, batch).ood) ++rejected;
  }
  PowerEstimate est;
  est.reps = reps;
  est.power = static_cast<double>(rejected) / static_cast<double>(reps);
  est.se = std::sqrt(est.power * (1.0 - est.power) /
                     static_cast<double>(reps));
  return est;
}

std::string calibration_to_json(const Calibration& cal) {
  json j;
  j["schema_version"] = "1";
  j["alpha"] = cal.config.alpha;
  j["distance"] = {{"kind", cal.config.distance.name()},
                   {"order", cal.config.distance.order}};
  j["lambda"] = cal.lambda;
  j["cal_batch_size"] = cal.cal_batch_size;
  j["cal_distances"] = cal.cal_distances;
  j["seed"] = cal.config.seed;
  j["folds"] = cal.config.folds;
  j["split_fraction"] = cal.config.split_fraction;
  j["batch_size"] = cal.config.batch_size;
  json ref;
  if (cal.model) {
    ref["type"] = "factor_model";
    ref["mu"] = vector_to_json(cal.model->mu);
    ref["loading"] = matrix_to_json(cal.model->loading);
    ref["noise_var"] = cal.model->noise_var;
    ref["latent_dim"] = cal.model->latent_dim;
  } else {
    ref["type"] = "gaussian";
  }
  ref["mean"] = vector_to_json(cal.reference.mean());
  ref["cov"] = matrix_to_json(cal.reference.cov());
  j["reference"] = std::move(ref);
  return j.dump(2) + "\n";
}

Calibration calibration_from_json(const std::string& text) {
  const json j = json::parse(text);
  TestConfig config;
  config.alpha = j.at("alpha").get<double>();
  config.distance =
      DistanceKind::parse(j.at("distance").at("kind").get<std::string>(),
                          j.at("distance").at("order").get<double>());
  config.seed = j.at("seed").get<std::uint64_t>();
  config.folds = j.at("folds").get<int>();
  config.split_fraction = j.at("split_fraction").get<double>();
  config.batch_size = j.at("batch_size").get<int>();
  const json& ref = j.at("reference");
  std::optional<FactorModel> model;
  if (ref.at("type").get<std::string>() == "factor_model") {
    FactorModel fm;
    fm.mu = vector_from_json(ref.at("mu"));
    fm.loading = matrix_from_json(ref.at("loading"));
    fm.noise_var = ref.at("noise_var").get<double>();
    fm.latent_dim = ref.at("latent_dim").get<int>();
    model = std::move(fm);
  }
  GaussianParams reference(vector_from_json(ref.at("mean")),
                           matrix_from_json(ref.at("cov")));
  Calibration cal{config, std::move(model), std::move(reference),
                  j.at("lambda").get<double>(),
                  j.at("cal_batch_size").get<int>(),
                  j.at("cal_distances").get<std::vector<double>>()};
  return cal;
}

void save_calibration(const Calibration& cal, const std::string& path) {
  write_text_file(path, calibration_to_json(cal));
}

Calibration load_calibration(const std::string& path) {
  return calibration_from_json(read_text_file(path));
}

}  // namespace oodt
