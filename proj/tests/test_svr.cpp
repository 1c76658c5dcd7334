#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "soilspec/regression.hpp"
#include "soilspec/rng.hpp"

using namespace soilspec;

namespace {

double svr_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                     double b, double C, double eps) {
  double obj = 0.5 * w.squaredNorm();
  for (int i = 0; i < X.rows(); ++i) {
    const double r = std::abs(y(i) - X.row(i).dot(w) - b);
    obj += C * std::max(0.0, r - eps);
  }
  return obj;
}

// Dense 2-D grid + local refinement over (w, b) for the 1-feature problem.
double grid_search_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                             double eps) {
  double best = std::numeric_limits<double>::infinity();
  double w_lo = -10.0, w_hi = 10.0, b_lo = -10.0, b_hi = 10.0;
  double bw = 0.0, bb = 0.0;
  for (int refine = 0; refine < 6; ++refine) {
    const int steps = 200;
    for (int i = 0; i <= steps; ++i) {
      const double w = w_lo + (w_hi - w_lo) * i / steps;
      for (int j = 0; j <= steps; ++j) {
        const double b = b_lo + (b_hi - b_lo) * j / steps;
        Eigen::VectorXd wv(1);
        wv << w;
        const double obj = svr_objective(X, y, wv, b, C, eps);
        if (obj < best) {
          best = obj;
          bw = w;
          bb = b;
        }
      }
    }
    const double half_w = (w_hi - w_lo) / steps * 4;
    const double half_b = (b_hi - b_lo) / steps * 4;
    w_lo = bw - half_w;
    w_hi = bw + half_w;
    b_lo = bb - half_b;
    b_hi = bb + half_b;
  }
  return best;
}

}  // namespace

TEST_CASE("points inside the tube are interpolated with near-zero loss") {
  Eigen::MatrixXd X(5, 1);
  X << -2, -1, 0, 1, 2;
  const Eigen::VectorXd y = 3.0 * X.col(0);
  const auto m = fit_svr_linear(X, y, SvrOptions{1.0, 0.1, 1e-4, 5000});
  const Eigen::VectorXd resid = y - predict(m, X);
  CHECK(resid.cwiseAbs().maxCoeff() <= 0.1 + 1e-6);
  const auto& p = std::get<SvrParams>(m.params);
  const Eigen::VectorXd w = m.coefficients;
  CHECK(svr_objective(X, y, w, m.intercept, p.C, p.epsilon) <= 0.5 * 9.0 + 1e-9);
}

TEST_CASE("solution matches a dense 2-D grid search on small problems") {
  Rng rng(3);
  Eigen::MatrixXd X(6, 1);
  X << -1.5, -0.8, -0.1, 0.4, 1.1, 1.9;
  Eigen::VectorXd y(6);
  // slope ~2 with intercept 1 and outliers that engage the hinge
  y << -2.3, -0.2, 1.1, 1.6, 3.4, 4.6;

  for (double C : {0.5, 1.0, 4.0}) {
    const auto m = fit_svr_linear(X, y, SvrOptions{C, 0.1, 1e-6, 20000});
    const auto& p = std::get<SvrParams>(m.params);
    const double ours = svr_objective(X, y, m.coefficients, m.intercept, C, p.epsilon);
    const double oracle = grid_search_objective(X, y, C, 0.1);
    CHECK(ours <= oracle + 1e-3);
    CHECK(ours >= oracle - 1e-3);  // the grid result is itself near-optimal
  }
}

TEST_CASE("duplicated dataset with halved C gives the same weight vector") {
  Rng rng(5);
  Eigen::MatrixXd X(8, 2);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
    y(i) = 1.5 * X(i, 0) - 0.7 * X(i, 1) + 0.3 + 0.2 * rng.normal();
  }
  Eigen::MatrixXd X2(16, 2);
  Eigen::VectorXd y2(16);
  X2 << X, X;
  y2 << y, y;

  const auto m1 = fit_svr_linear(X, y, SvrOptions{1.0, 0.1, 1e-6, 50000});
  const auto m2 = fit_svr_linear(X2, y2, SvrOptions{0.5, 0.1, 1e-6, 50000});
  // objectives are equivalent, so the primal solutions agree within tolerance
  CHECK((m1.coefficients - m2.coefficients).cwiseAbs().maxCoeff() < 1e-3);
  CHECK(std::abs(m1.intercept - m2.intercept) < 1e-3);
}

TEST_CASE("dual feasibility and complementary slackness at convergence") {
  Rng rng(7);
  const int n = 30;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
    y(i) = X(i, 0) - 2.0 * X(i, 1) + 0.5 + 0.3 * rng.normal();
  }
  const double C = 1.0, eps = 0.1, tol = 1e-5;
  const auto m = fit_svr_linear(X, y, SvrOptions{C, eps, tol, 50000});
  const auto& p = std::get<SvrParams>(m.params);
  REQUIRE(p.converged);

  const Eigen::VectorXd f = predict(m, X);
  for (int i = 0; i < n; ++i) {
    const double au = p.alpha_up(i), ad = p.alpha_down(i);
    CHECK(au >= -1e-12);
    CHECK(au <= C + 1e-12);
    CHECK(ad >= -1e-12);
    CHECK(ad <= C + 1e-12);
    // at most one side active
    CHECK(std::min(au, ad) <= 1e-8);
    const double r = y(i) - f(i);
    // complementary slackness: interior duals pin the residual to +-eps
    if (au > 1e-7 && au < C - 1e-7) CHECK(r == doctest::Approx(eps).epsilon(2e-3));
    if (ad > 1e-7 && ad < C - 1e-7) CHECK(r == doctest::Approx(-eps).epsilon(2e-3));
    // free points lie inside the tube
    if (au <= 1e-7 && ad <= 1e-7) CHECK(std::abs(r) <= eps + 1e-4);
  }
  // the constraint sum_i (alpha_up - alpha_down) = 0 is maintained exactly
  CHECK(std::abs((p.alpha_up - p.alpha_down).sum()) < 1e-10);
}

TEST_CASE("svr input validation") {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  CHECK_THROWS_AS(fit_svr_linear(X, y, SvrOptions{-1.0, 0.1, 1e-3, 100}), std::invalid_argument);
  CHECK_THROWS_AS(fit_svr_linear(X, y, SvrOptions{1.0, 0.0, 1e-3, 100}), std::invalid_argument);
  Eigen::MatrixXd X1(1, 1);
  X1 << 1;
  Eigen::VectorXd y1(1);
  y1 << 1;
  CHECK_THROWS_AS(fit_svr_linear(X1, y1, SvrOptions{}), std::invalid_argument);
}

TEST_CASE("svr is deterministic") {
  Rng rng(11);
  Eigen::MatrixXd X(20, 4);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 4; ++j) X(i, j) = rng.normal();
    y(i) = X.row(i).sum() + 0.1 * rng.normal();
  }
  const auto m1 = fit_svr_linear(X, y);
  const auto m2 = fit_svr_linear(X, y);
  CHECK((m1.coefficients - m2.coefficients).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m1.intercept == m2.intercept);
}
