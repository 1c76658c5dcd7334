#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>

#include "soilspec/regression.hpp"
#include "soilspec/rng.hpp"

using namespace soilspec;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Normal-equations oracle for well-conditioned problems (intercept via
// explicit ones column).
Eigen::VectorXd normal_equations_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::MatrixXd Xa(X.rows(), X.cols() + 1);
  Xa << X, Eigen::VectorXd::Ones(X.rows());
  return (Xa.transpose() * Xa).ldlt().solve(Xa.transpose() * y);
}

}  // namespace

TEST_CASE("ols recovers an exact linear relationship") {
  Eigen::MatrixXd X(5, 1);
  X << 0, 1, 2, 3, 4;
  Eigen::VectorXd y = 2.0 * X.col(0).array() + 1.0;
  const auto m = fit_ols(X, y);
  CHECK(m.coefficients(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((predict(m, X) - y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ols on a constant target returns the minimum-norm solution") {
  Rng rng(3);
  Eigen::MatrixXd X = random_matrix(8, 3, rng);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(8, 7.0);
  const auto m = fit_ols(X, y);
  CHECK(m.coefficients.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(m.intercept == doctest::Approx(7.0));
}

TEST_CASE("ols matches the normal-equations oracle") {
  Rng rng(7);
  const Eigen::MatrixXd X = random_matrix(20, 5, rng);
  Eigen::VectorXd beta_true(5);
  beta_true << 1.0, -2.0, 0.5, 3.0, 0.0;
  Eigen::VectorXd y = X * beta_true;
  for (int i = 0; i < y.size(); ++i) y(i) += 0.01 * rng.normal();

  const auto m = fit_ols(X, y);
  const Eigen::VectorXd oracle = normal_equations_fit(X, y);
  const Eigen::VectorXd pred = predict(m, X);
  Eigen::MatrixXd Xa(X.rows(), X.cols() + 1);
  Xa << X, Eigen::VectorXd::Ones(X.rows());
  const Eigen::VectorXd pred_oracle = Xa * oracle;
  CHECK((pred - pred_oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ols handles rank-deficient designs with the minimum-norm rule") {
  Rng rng(9);
  Eigen::MatrixXd X(10, 3);
  X.col(0) = random_matrix(10, 1, rng);
  X.col(1) = X.col(0);          // duplicate column
  X.col(2) = 2.0 * X.col(0);    // and a multiple
  const Eigen::VectorXd y = 3.0 * X.col(0);
  const auto m = fit_ols(X, y);
  CHECK((predict(m, X) - y).cwiseAbs().maxCoeff() < 1e-9);
  // the minimum-norm solution spreads weight rather than picking one column
  Eigen::VectorXd alt = Eigen::VectorXd::Zero(3);
  alt(0) = 3.0;
  CHECK(m.coefficients.norm() <= alt.norm() + 1e-9);
}

TEST_CASE("ols rejects non-finite input") {
  Eigen::MatrixXd X(2, 1);
  X << 1.0, std::nan("");
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  CHECK_THROWS_AS(fit_ols(X, y), std::invalid_argument);
}

TEST_CASE("lr_bf picks the most correlated column") {
  Rng rng(13);
  SUBCASE("a column equal to y wins with perfect train fit") {
    Eigen::MatrixXd X = random_matrix(30, 4, rng);
    const Eigen::VectorXd y = X.col(2);
    const auto m = fit_lr_best_feature(X, y);
    const auto& p = std::get<LrBfParams>(m.params);
    CHECK(p.feature_index == 2);
    CHECK((predict(m, X) - y).cwiseAbs().maxCoeff() < 1e-9);
    for (int j = 0; j < 4; ++j) {
      if (j != 2) CHECK(m.coefficients(j) == 0.0);
    }
  }

  SUBCASE("absolute correlation decides between 0.9 and -0.95") {
    // construct x1 with corr(x1,y) ~ 0.9 and x2 with corr ~ -0.95 from
    // orthogonalized noise: x = r*y_unit + sqrt(1-r^2)*z_unit
    const int n = 400;
    Eigen::VectorXd y(n), z(n);
    for (int i = 0; i < n; ++i) {
      y(i) = rng.normal();
      z(i) = rng.normal();
    }
    y.array() -= y.mean();
    z.array() -= z.mean();
    z -= y * (y.dot(z) / y.squaredNorm());  // exactly orthogonal to y
    const Eigen::VectorXd yu = y / y.norm(), zu = z / z.norm();
    Eigen::MatrixXd X(n, 2);
    X.col(0) = 0.90 * yu + std::sqrt(1 - 0.90 * 0.90) * zu;
    X.col(1) = -(0.95 * yu) + std::sqrt(1 - 0.95 * 0.95) * zu;
    const auto m = fit_lr_best_feature(X, y);
    CHECK(std::get<LrBfParams>(m.params).feature_index == 1);
    CHECK(std::get<LrBfParams>(m.params).correlation == doctest::Approx(-0.95).epsilon(1e-9));
  }

  SUBCASE("exact ties break to the lowest column index") {
    Eigen::MatrixXd X(6, 8);
    X.setZero();
    Eigen::VectorXd y(6);
    y << 1, 2, 3, 4, 5, 6;
    X.col(3) = y;
    X.col(7) = y;  // identical correlation
    const auto m = fit_lr_best_feature(X, y);
    CHECK(std::get<LrBfParams>(m.params).feature_index == 3);
  }

  SUBCASE("all-constant columns is an error") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 3);
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 5;
    CHECK_THROWS_AS(fit_lr_best_feature(X, y), std::invalid_argument);
  }
}

TEST_CASE("plsr equals ols at full rank") {
  Rng rng(21);
  const Eigen::MatrixXd X = random_matrix(40, 6, rng);
  Eigen::VectorXd beta(6);
  beta << 2, -1, 0.5, 0, 1, -0.25;
  Eigen::VectorXd y = X * beta;
  for (int i = 0; i < y.size(); ++i) y(i) += 0.05 * rng.normal();

  const auto pls = fit_plsr(X, y, PlsrOptions{6, 10000, 1e-12});
  const auto ols = fit_ols(X, y);
  CHECK((predict(pls, X) - predict(ols, X)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("plsr with one component on a single column equals univariate ols") {
  Rng rng(23);
  const Eigen::MatrixXd X = random_matrix(25, 1, rng);
  Eigen::VectorXd y = 4.0 * X.col(0).array() - 2.0;
  for (int i = 0; i < y.size(); ++i) y(i) += 0.01 * rng.normal();
  const auto pls = fit_plsr(X, y, PlsrOptions{1, 10000, 1e-12});
  const auto ols = fit_ols(X, y);
  CHECK((predict(pls, X) - predict(ols, X)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("plsr with y orthogonal to the columns returns the intercept model") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 3.5);  // centered y is zero
  const auto m = fit_plsr(X, y, PlsrOptions{2, 100, 1e-9});
  CHECK(m.coefficients.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.intercept == doctest::Approx(3.5));
  CHECK(std::get<PlsrParams>(m.params).n_components == 0);
}

TEST_CASE("plsr scores are mutually orthogonal") {
  Rng rng(29);
  const Eigen::MatrixXd X = random_matrix(30, 10, rng);
  Eigen::VectorXd y = X.leftCols(3) * Eigen::Vector3d(1.0, -2.0, 0.5);
  for (int i = 0; i < y.size(); ++i) y(i) += 0.1 * rng.normal();
  const auto m = fit_plsr(X, y, PlsrOptions{5, 10000, 1e-12});
  const Eigen::MatrixXd T = plsr_scores(m, X);
  REQUIRE(T.cols() == 5);
  for (int a = 0; a < T.cols(); ++a) {
    for (int b = a + 1; b < T.cols(); ++b) {
      CHECK(std::abs(T.col(a).dot(T.col(b))) < 1e-8 * T.col(a).norm() * T.col(b).norm());
    }
  }
}

TEST_CASE("plsr stops early when X deflates to zero") {
  Eigen::MatrixXd X(6, 4);
  Rng rng(31);
  X.col(0) = random_matrix(6, 1, rng);
  X.col(1) = 2.0 * X.col(0);
  X.col(2) = -X.col(0);
  X.col(3) = 0.5 * X.col(0);  // rank 1
  const Eigen::VectorXd y = X.col(0);
  const auto m = fit_plsr(X, y, PlsrOptions{3, 100, 1e-9});
  CHECK(std::get<PlsrParams>(m.params).n_components < 3);
  CHECK_FALSE(m.notes.empty());
  CHECK((predict(m, X) - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("plsr validates n_components") {
  Rng rng(33);
  const Eigen::MatrixXd X = random_matrix(5, 3, rng);
  const Eigen::VectorXd y = X.col(0);
  CHECK_THROWS_AS(fit_plsr(X, y, PlsrOptions{5, 100, 1e-9}), std::invalid_argument);
  CHECK_THROWS_AS(fit_plsr(X, y, PlsrOptions{0, 100, 1e-9}), std::invalid_argument);
}

TEST_CASE("prediction equivariance under target standardization") {
  Rng rng(37);
  const Eigen::MatrixXd X = random_matrix(30, 4, rng);
  Eigen::VectorXd y = X * Eigen::Vector4d(1.0, 2.0, -1.0, 0.5);
  for (int i = 0; i < y.size(); ++i) y(i) += 0.2 * rng.normal();
  const double mu = y.mean();
  const double sd = std::sqrt((y.array() - mu).square().sum() / y.size());
  const Eigen::VectorXd ys = (y.array() - mu) / sd;

  for (auto kind : {RegressorKind::Ols, RegressorKind::Plsr}) {
    RegressionModel plain, scaled;
    if (kind == RegressorKind::Ols) {
      plain = fit_ols(X, y);
      scaled = fit_ols(X, ys);
    } else {
      plain = fit_plsr(X, y, PlsrOptions{4, 10000, 1e-12});
      scaled = fit_plsr(X, ys, PlsrOptions{4, 10000, 1e-12});
    }
    const Eigen::VectorXd direct = predict(plain, X);
    const Eigen::VectorXd unscaled = (predict(scaled, X).array() * sd) + mu;
    CHECK((direct - unscaled).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("predict validates dimensions and zero models are constant") {
  RegressionModel m;
  m.kind = RegressorKind::Ols;
  m.coefficients = Eigen::VectorXd::Zero(3);
  m.intercept = 1.5;
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 3);
  const Eigen::VectorXd p = predict(m, X);
  for (int i = 0; i < 4; ++i) CHECK(p(i) == 1.5);
  CHECK_THROWS_AS(predict(m, Eigen::MatrixXd::Random(4, 2)), std::invalid_argument);
}

TEST_CASE("model persistence round-trips predictions bit-for-bit") {
  Rng rng(41);
  const Eigen::MatrixXd X = random_matrix(20, 5, rng);
  Eigen::VectorXd y = X * Eigen::VectorXd::Ones(5);
  for (int i = 0; i < y.size(); ++i) y(i) += 0.3 * rng.normal();

  const auto path = std::filesystem::temp_directory_path() / "soilspec_model_test.json";
  for (auto kind : {RegressorKind::Ols, RegressorKind::LrBestFeature, RegressorKind::Plsr}) {
    RegressionModel m;
    if (kind == RegressorKind::Ols) m = fit_ols(X, y);
    else if (kind == RegressorKind::LrBestFeature) m = fit_lr_best_feature(X, y);
    else m = fit_plsr(X, y, PlsrOptions{3, 10000, 1e-12});
    m.feature_names = {"a", "b", "c", "d", "e"};
    save_model(m, path.string());
    const RegressionModel back = load_model(path.string());
    CHECK(back.kind == m.kind);
    CHECK(back.feature_names == m.feature_names);
    const Eigen::VectorXd p1 = predict(m, X);
    const Eigen::VectorXd p2 = predict(back, X);
    for (int i = 0; i < p1.size(); ++i) CHECK(p1(i) == p2(i));  // exact
  }
  std::filesystem::remove(path);
}
