#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "flr/estimator.hpp"
#include "flr/simulate.hpp"

using namespace flr;

TEST_CASE("sampling from the zero covariance gives zeros") {
  RngStream rng = derive_stream(301, {1});
  const Matrix x = sample_covariates(SpectralOperator::Zero(4), 10, rng);
  CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("per-coordinate sample variance matches the covariance eigenvalues") {
  Vector xi(4);
  xi << 1.0, 0.5, 0.1, 0.01;
  const SpectralOperator c = SpectralOperator::FromDiagonal(xi);
  RngStream rng = derive_stream(302, {2});
  const int n = 100000;
  const Matrix x = sample_covariates(c, n, rng);
  for (Index i = 0; i < 4; ++i) {
    const double var = x.col(i).squaredNorm() / n - std::pow(x.col(i).mean(), 2);
    CHECK(var == doctest::Approx(xi(i)).epsilon(0.03));
  }
}

TEST_CASE("sampling is bit-identical under a fixed stream") {
  Vector xi(3);
  xi << 1.0, 0.4, 0.2;
  const SpectralOperator c = SpectralOperator::FromDiagonal(xi);
  RngStream a = derive_stream(303, {5});
  RngStream b = derive_stream(303, {5});
  const Matrix xa = sample_covariates(c, 50, a);
  const Matrix xb = sample_covariates(c, 50, b);
  CHECK((xa - xb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("commutative slope construction") {
  Vector mu(1), h(1);
  mu << 4.0;
  h << 1.0;
  CHECK(make_slope_commutative(0.5, mu, h)(0) == doctest::Approx(2.0).epsilon(1e-14));

  // alpha -> 0 convention
  Vector mu4(4), h4(4);
  mu4 << 1.0, 0.3, 0.05, 1e-6;
  h4 << 0.5, 0.4, 0.3, 0.2;
  const Vector nearly_h = make_slope_commutative(1e-12, mu4, h4);
  CHECK((nearly_h - h4).cwiseAbs().maxCoeff() < 1e-6);

  // termwise against an elementwise oracle
  const int m = 16;
  const Vector h16 = default_h(m, 0.55);
  Vector mu16(m);
  for (int i = 1; i <= m; ++i) mu16(i - 1) = std::pow((i - 0.5) * kPi, -4.0);
  const Vector beta = make_slope_commutative(0.5, mu16, h16);
  for (int i = 0; i < m; ++i)
    CHECK(beta(i) == doctest::Approx(std::sqrt(mu16(i)) * h16(i)).epsilon(1e-14));

  CHECK_THROWS_AS(make_slope_commutative(0.0, mu, h), PreconditionError);
}

TEST_CASE("noncommutative slope construction") {
  Vector h(3);
  h << 1.0, -0.5, 0.25;
  const SpectralOperator t_op = SpectralOperator::FromDiagonal((Vector(3) << 4.0, 1.0, 0.25).finished());
  // Lambda = I: beta = T^{1/2} h
  const Vector beta = make_slope_noncommutative(0.7, t_op, SpectralOperator::Identity(3), h);
  CHECK(beta(0) == doctest::Approx(2.0 * h(0)).epsilon(1e-12));
  CHECK(beta(1) == doctest::Approx(h(1)).epsilon(1e-12));
  CHECK(beta(2) == doctest::Approx(0.5 * h(2)).epsilon(1e-12));

  // commuting diagonal case: mu = 4, xi = 1, s = 1 -> scalar chain 2 * 4 = 8
  Vector one(1);
  one << 1.0;
  const SpectralOperator t1 = SpectralOperator::FromDiagonal((Vector(1) << 4.0).finished());
  const SpectralOperator lam = sandwich(t1, SpectralOperator::FromDiagonal(one));
  const Vector beta1 = make_slope_noncommutative(1.0, t1, lam, one);
  CHECK(beta1(0) == doctest::Approx(8.0).epsilon(1e-12));

  CHECK_THROWS_AS(make_slope_noncommutative(0.0, t1, lam, one), PreconditionError);
}

TEST_CASE("slope constructions agree when the exponents are matched") {
  // power decays t=4, c=2: T^{1/2} Lambda^s = T^alpha on the diagonal when
  // s = t (alpha - 1/2) / (t + c)
  const int m = 12;
  Vector mu(m), xi(m);
  for (int i = 1; i <= m; ++i) {
    mu(i - 1) = std::pow(static_cast<double>(i), -4.0);
    xi(i - 1) = std::pow(static_cast<double>(i), -2.0);
  }
  const double alpha = 1.25;
  const double s = 4.0 * (alpha - 0.5) / 6.0;
  const Vector h = default_h(m, 0.55);
  const Vector direct = make_slope_commutative(alpha, mu, h);
  const Vector chained =
      make_slope_noncommutative(s, SpectralOperator::FromDiagonal(mu),
                                SpectralOperator::FromDiagonal(mu.cwiseProduct(xi)), h);
  for (int i = 0; i < m; ++i)
    CHECK(chained(i) == doctest::Approx(direct(i)).epsilon(1e-12));
}

TEST_CASE("noncommutative pair with identity mixing") {
  const OperatorPair pair = make_noncommutative_pair(32, 4.0, 2.0, 0);
  for (int i = 1; i <= 16; ++i)
    CHECK(pair.lambda_op.eigenvalues()(i - 1) ==
          doctest::Approx(std::pow(static_cast<double>(i), -6.0)).epsilon(1e-10));
  CHECK(pair.fitted_b == doctest::Approx(6.0).epsilon(0.05 / 6.0));
  const Matrix tc = pair.t_op.matrix() * pair.c_op.matrix();
  CHECK((tc - tc.transpose()).norm() < 1e-14);
}

TEST_CASE("noncommutative pair with real mixing does not commute") {
  const OperatorPair pair = make_noncommutative_pair(32, 4.0, 2.0, 11);
  const Matrix tc = pair.t_op.matrix() * pair.c_op.matrix();
  const Matrix ct = pair.c_op.matrix() * pair.t_op.matrix();
  CHECK((tc - ct).norm() > 1e-6);
  CHECK(pair.fitted_b > 1.0);

  const OperatorPair again = make_noncommutative_pair(32, 4.0, 2.0, 11);
  CHECK((pair.c_op.matrix() - again.c_op.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("datasets honor the regression identity") {
  Scenario scenario;
  scenario.dim = 16;
  scenario.sigma = 0.0;
  const ScenarioModel model = build_model(scenario);
  RngStream rng = derive_stream(scenario.seed, {1, 0});
  const Dataset data = gen_dataset(model, 0.0, 64, rng);
  const Vector residual = data.y - data.x_coeffs * data.truth->beta_star;
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("noise variance matches sigma^2") {
  Scenario scenario;
  scenario.dim = 8;
  scenario.sigma = 1.0;
  const ScenarioModel model = build_model(scenario);
  RngStream rng = derive_stream(7, {1});
  const int n = 100000;
  const Dataset data = gen_dataset(model, 1.0, n, rng);
  const Vector residual = data.y - data.x_coeffs * data.truth->beta_star;
  const double var = residual.squaredNorm() / n - std::pow(residual.mean(), 2);
  CHECK(var >= 0.98);
  CHECK(var <= 1.02);
}

TEST_CASE("Gaussian covariates have kurtosis ratio 3 in random directions") {
  Scenario scenario;
  scenario.dim = 16;
  const ScenarioModel model = build_model(scenario);
  RngStream rng = derive_stream(31, {2});
  const int n = 100000;
  const Matrix x = sample_covariates(model.c_op, n, rng);
  RngStream dir_rng = derive_stream(31, {3});
  for (int trial = 0; trial < 8; ++trial) {
    Vector f(16);
    for (Index i = 0; i < 16; ++i) f(i) = dir_rng.normal();
    const Vector proj = x * f;
    double m2 = 0.0, m4 = 0.0;
    for (Index k = 0; k < n; ++k) {
      const double p2 = proj(k) * proj(k);
      m2 += p2;
      m4 += p2 * p2;
    }
    m2 /= n;
    m4 /= n;
    const double ratio = m4 / (m2 * m2);
    CHECK(ratio >= 2.8);
    CHECK(ratio <= 3.2);
  }
}

TEST_CASE("empirical covariance concentrates") {
  Scenario scenario;
  scenario.dim = 16;
  const ScenarioModel model = build_model(scenario);
  RngStream rng = derive_stream(33, {4});
  const int n = 10 * 16;
  const Matrix x = sample_covariates(model.c_op, n, rng);
  const Matrix c_hat = empirical_covariance_matrix(x);
  const double rel = (c_hat - model.c_op.matrix()).norm() / model.c_op.matrix().norm();
  CHECK(rel <= 5.0 * 16.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("identical configuration gives a bit-identical dataset") {
  Scenario scenario;
  scenario.dim = 12;
  scenario.mode = ScenarioMode::NonCommutative;
  scenario.s = 1.0;
  scenario.sigma = 0.3;
  scenario.mixing_seed = 5;
  RngStream a = derive_stream(scenario.seed, {1, 64, 3});
  RngStream b = derive_stream(scenario.seed, {1, 64, 3});
  const Dataset da = gen_dataset(scenario, 64, a);
  const Dataset db = gen_dataset(scenario, 64, b);
  CHECK((da.x_coeffs - db.x_coeffs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((da.y - db.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((da.truth->beta_star - db.truth->beta_star).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dataset CSV round trip") {
  Scenario scenario;
  scenario.dim = 8;
  RngStream rng = derive_stream(scenario.seed, {1, 32, 0});
  const Dataset data = gen_dataset(scenario, 32, rng);
  const std::string path = "/tmp/flr_test_dataset.csv";
  write_dataset_csv(data, path);
  const Dataset loaded = read_dataset_csv(path);
  std::remove(path.c_str());
  REQUIRE(loaded.x_coeffs.rows() == 32);
  REQUIRE(loaded.x_coeffs.cols() == 8);
  CHECK((loaded.x_coeffs - data.x_coeffs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.y - data.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scenario validation") {
  Scenario scenario;
  scenario.dim = 4;
  CHECK_THROWS_AS(build_model(scenario), PreconditionError);
  CHECK_THROWS_AS(make_noncommutative_pair(16, 0.5, 2.0, 1), PreconditionError);
}
