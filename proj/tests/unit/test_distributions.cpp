#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oodt/distances.hpp"
#include "oodt/distributions.hpp"
#include "oodt/mathutil.hpp"
#include "oodt/rng.hpp"

using namespace oodt;

namespace {

Sample make_sample(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return Sample(m);
}

GaussianParams gaussian2(double m0, double m1, double v00, double v01,
                         double v11) {
  Eigen::VectorXd mean(2);
  mean << m0, m1;
  Eigen::MatrixXd cov(2, 2);
  cov << v00, v01, v01, v11;
  return GaussianParams(mean, cov);
}

}  // namespace

TEST_SUITE("distributions") {

TEST_CASE("sample validates shape and finiteness") {
  CHECK_THROWS_AS(Sample(Eigen::MatrixXd(0, 3)), std::invalid_argument);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, std::nan(""), 4.0;
  CHECK_THROWS_AS(Sample{bad}, std::invalid_argument);
}

TEST_CASE("fit_gaussian on the square corners") {
  const Sample s = make_sample({{0, 0}, {2, 0}, {0, 2}, {2, 2}});
  const GaussianParams g = fit_gaussian(s, 0.0);
  CHECK(g.mean()(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.mean()(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.cov()(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(g.cov()(1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(g.cov()(0, 1)) < 1e-14);
}

TEST_CASE("fit_gaussian constant sample keeps the absolute regularizer") {
  const Sample s = make_sample({{5.0}, {5.0}, {5.0}});
  const GaussianParams g = fit_gaussian(s, 1e-6);
  CHECK(g.mean()(0) == doctest::Approx(5.0));
  CHECK(g.cov()(0, 0) == doctest::Approx(1e-6).epsilon(1e-9));
}

TEST_CASE("fit_gaussian rejects undersized input") {
  const Sample s = make_sample({{1.0, 2.0}});
  CHECK_THROWS_AS(fit_gaussian(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_gaussian(make_sample({{1.0}, {2.0}}), -1.0),
                  std::invalid_argument);
}

TEST_CASE("fit_gaussian recovers the generating covariance") {
  const GaussianParams truth = gaussian2(0, 0, 1.0, 0.6, 1.0);
  const Sample s = sample_gaussian(truth, 5000, 99);
  const GaussianParams fitted = fit_gaussian(s, 0.0);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(fitted.cov()(i, j) - truth.cov()(i, j)) < 0.1);
    }
  }
}

TEST_CASE("fit then sample converges with n") {
  const GaussianParams truth = gaussian2(1.0, -2.0, 2.0, 0.5, 1.0);
  double previous_error = 1e100;
  for (int n : {100, 1000, 10000}) {
    const Sample s = sample_gaussian(truth, n, 1234);
    const GaussianParams fitted = fit_gaussian(s, 0.0);
    const double err = (fitted.cov() - truth.cov()).norm() +
                       (fitted.mean() - truth.mean()).norm();
    CHECK(err < previous_error);
    previous_error = err;
  }
  CHECK(previous_error < 0.1);
}

TEST_CASE("factor model recovers a noiseless subspace") {
  Rng rng(7);
  const Eigen::Index d = 6;
  const Eigen::Index p = 2;
  Eigen::MatrixXd w(d, p);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) w(i, j) = rng.normal();
  }
  Eigen::MatrixXd z(60, p);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  const Sample data(z * w.transpose());
  const FactorModel model = fit_factor_model(data, 2);

  // Principal angles between span(loading) and span(w).
  const Eigen::MatrixXd q1 =
      Eigen::HouseholderQR<Eigen::MatrixXd>(model.loading).householderQ() *
      Eigen::MatrixXd::Identity(d, p);
  const Eigen::MatrixXd q2 =
      Eigen::HouseholderQR<Eigen::MatrixXd>(w).householderQ() *
      Eigen::MatrixXd::Identity(d, p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q1.transpose() * q2);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double cos_angle = std::min(svd.singularValues()(i), 1.0);
    CHECK(std::acos(cos_angle) < 1e-6);
  }
}

TEST_CASE("factor model matches the hand-built spectrum") {
  // Hadamard design whose sample covariance is exactly diag(4, 1, 1).
  const double c = std::sqrt(3.0) / 2.0;
  const Sample s = make_sample({{2 * c, c, c},
                                {2 * c, -c, -c},
                                {-2 * c, c, -c},
                                {-2 * c, -c, c}});
  const GaussianParams check = fit_gaussian(s, 0.0);
  CHECK(check.cov()(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(check.cov()(1, 1) == doctest::Approx(1.0).epsilon(1e-12));

  const FactorModel model = fit_factor_model(s, 1);
  CHECK(model.noise_var == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model.loading.squaredNorm() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(model.loading(0, 0)) ==
        doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("factor model rejects impossible dimensions") {
  const Sample s = make_sample({{1, 2}, {3, 4}, {5, 6}});
  CHECK_THROWS_AS(fit_factor_model(s, 2), std::invalid_argument);
  CHECK_THROWS_AS(fit_factor_model(s, 0), std::invalid_argument);
}

TEST_CASE("latent posterior centers on the training data") {
  Rng rng(11);
  const Eigen::Index d = 12;
  const Eigen::Index n = 400;
  Eigen::MatrixXd w(d, 2);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) w(i, j) = rng.normal();
  }
  Eigen::MatrixXd z(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) z(i, j) = rng.normal();
  }
  Eigen::MatrixXd noise(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) noise(i, j) = 0.1 * rng.normal();
  }
  const Sample train(z * w.transpose() + noise);
  const FactorModel model = fit_factor_model(train, 2);
  const GaussianParams posterior = latent_posterior(model, train);
  // Scores of the training data are centered by construction; allow 3 MC
  // standard errors of the score spread.
  for (Eigen::Index j = 0; j < 2; ++j) {
    const double se =
        3.0 * std::sqrt(posterior.cov()(j, j) / static_cast<double>(n));
    CHECK(std::abs(posterior.mean()(j)) < se + 1e-9);
  }

  SUBCASE("shifted batch moves the posterior mean") {
    Eigen::MatrixXd z2(200, 2);
    for (Eigen::Index i = 0; i < 200; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) z2(i, j) = 1.0 + rng.normal();
    }
    Eigen::MatrixXd noise2(200, d);
    for (Eigen::Index i = 0; i < 200; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) noise2(i, j) = 0.1 * rng.normal();
    }
    const Sample shifted(z2 * w.transpose() + noise2);
    const GaussianParams post_shifted = latent_posterior(model, shifted);
    CHECK(wasserstein2_gaussian(posterior, post_shifted) > 0.5);
  }

  SUBCASE("repeated point collapses to the per-point posterior covariance") {
    Eigen::MatrixXd repeated(5, d);
    for (Eigen::Index i = 0; i < 5; ++i) {
      repeated.row(i) = train.values().row(0);
    }
    const GaussianParams collapsed = latent_posterior(model, Sample(repeated));
    const Eigen::MatrixXd m =
        model.loading.transpose() * model.loading +
        model.noise_var * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd expected =
        model.noise_var * m.llt().solve(Eigen::MatrixXd::Identity(2, 2));
    CHECK((collapsed.cov() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("dimension mismatch is rejected") {
    const Sample narrow = make_sample({{1.0, 2.0}, {3.0, 4.0}});
    CHECK_THROWS_AS(latent_posterior(model, narrow), std::invalid_argument);
  }
}

TEST_CASE("sample_gaussian is deterministic per seed") {
  const GaussianParams g = gaussian2(0, 0, 1.0, 0.6, 1.0);
  const Sample a = sample_gaussian(g, 50, 77);
  const Sample b = sample_gaussian(g, 50, 77);
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() == 0.0);
  const Sample c = sample_gaussian(g, 50, 78);
  CHECK((a.values() - c.values()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sample_gaussian matches its moments") {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  const GaussianParams iso(mean, Eigen::MatrixXd::Identity(2, 2));
  const Sample s = sample_gaussian(iso, 10000, 5);
  for (Eigen::Index j = 0; j < 2; ++j) {
    CHECK(std::abs(s.values().col(j).mean()) < 0.05);
  }

  const GaussianParams corr = gaussian2(0, 0, 1.0, 0.6, 1.0);
  const Sample t = sample_gaussian(corr, 10000, 6);
  const GaussianParams fitted = fit_gaussian(t, 0.0);
  const double rho = fitted.cov()(0, 1) /
                     std::sqrt(fitted.cov()(0, 0) * fitted.cov()(1, 1));
  CHECK(std::abs(rho - 0.6) < 0.03);
}

TEST_CASE("sample_gaussian rejects bad arguments") {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  const GaussianParams g(mean, Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(sample_gaussian(g, 0, 1), std::invalid_argument);
}

TEST_CASE("gaussian params reject asymmetric garbage") {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_AS(GaussianParams(mean, indefinite), std::invalid_argument);
  Eigen::MatrixXd skew(2, 2);
  skew << 1.0, 1e-11, -1e-11, 1.0;  // symmetrized away at construction
  const GaussianParams g(mean, skew);
  CHECK(g.cov()(0, 1) == g.cov()(1, 0));
}

TEST_CASE("histogram basics") {
  SUBCASE("point mass in one bin") {
    const DiscretePmf pmf = histogram({0.5, 0.5, 0.5}, {0.0, 1.0});
    CHECK(pmf.size() == 1);
    CHECK(pmf.weights()[0] == 1.0);
    CHECK(pmf.support()[0] == doctest::Approx(0.5));
  }
  SUBCASE("uniform grid spreads evenly") {
    std::vector<double> values;
    for (int i = 0; i < 1000; ++i) {
      values.push_back(static_cast<double>(i) / 1000.0);
    }
    std::vector<double> edges;
    for (int i = 0; i <= 10; ++i) {
      edges.push_back(static_cast<double>(i) / 10.0);
    }
    const DiscretePmf pmf = histogram(values, edges);
    for (double w : pmf.weights()) {
      CHECK(w == doctest::Approx(0.1).epsilon(1e-12));
    }
  }
  SUBCASE("weights sum to one exactly") {
    Rng rng(3);
    std::vector<double> values;
    for (int i = 0; i < 997; ++i) values.push_back(rng.normal());
    const DiscretePmf pmf =
        histogram(values, {-2.0, -1.0, -0.1, 0.4, 1.3, 2.0});
    double total = 0.0;
    for (double w : pmf.weights()) total += w;
    CHECK(total == 1.0);
  }
  SUBCASE("out-of-range values are clipped into end bins") {
    const DiscretePmf pmf = histogram({-10.0, 10.0}, {0.0, 1.0, 2.0});
    CHECK(pmf.weights()[0] == doctest::Approx(0.5));
    CHECK(pmf.weights()[1] == doctest::Approx(0.5));
  }
  SUBCASE("bad input is rejected") {
    CHECK_THROWS_AS(histogram({}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(histogram({1.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(histogram({1.0}, {1.0, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("histogram approximates the normal density") {
  Rng rng(42);
  std::vector<double> values(100000);
  for (double& v : values) v = rng.normal();
  std::vector<double> edges;
  for (int i = 0; i <= 20; ++i) edges.push_back(-4.0 + 0.4 * i);
  const DiscretePmf pmf = histogram(values, edges);
  double worst = 0.0;
  for (std::size_t b = 0; b < pmf.size(); ++b) {
    double expected = norm_cdf(edges[b + 1]) - norm_cdf(edges[b]);
    if (b == 0) expected += norm_cdf(edges[0]);
    if (b + 1 == pmf.size()) expected += 1.0 - norm_cdf(edges.back());
    worst = std::max(worst, std::abs(pmf.weights()[b] - expected));
  }
  CHECK(worst < 0.01);
}

TEST_CASE("discrete pmf invariants") {
  CHECK_THROWS_AS(DiscretePmf({0.0, 1.0}, {0.6, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(DiscretePmf({1.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscretePmf({0.0, 1.0}, {-0.1, 1.1}), std::invalid_argument);
  const DiscretePmf u = DiscretePmf::uniform(7);
  double total = 0.0;
  for (double w : u.weights()) total += w;
  CHECK(total == 1.0);
}

TEST_CASE("empirical1d sorts and validates") {
  const Empirical1D e({3.0, 1.0, 2.0});
  CHECK(e.values() == std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(Empirical1D(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(Empirical1D::from_sorted({2.0, 1.0}),
                  std::invalid_argument);
}

}  // TEST_SUITE
