#include "soilspec/detail/smo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace soilspec::detail {

namespace {

constexpr double kCurvatureFloor = 1e-12;

struct Bounds {
  double m = -std::numeric_limits<double>::infinity();  // tightest lower bound on multiplier
  double M = std::numeric_limits<double>::infinity();   // tightest upper bound
  int i = -1;  // argmax lower
  int j = -1;  // argmin upper
};

Bounds scan_bounds(const Eigen::VectorXd& grad, const Eigen::VectorXd& sign,
                   const Eigen::VectorXd& alpha, const Eigen::VectorXd& upper) {
  Bounds b;
  const int n = static_cast<int>(grad.size());
  for (int k = 0; k < n; ++k) {
    const double s = sign(k);
    const double v = s > 0 ? grad(k) : -grad(k);
    const bool can_increase = alpha(k) < upper(k);
    const bool can_decrease = alpha(k) > 0.0;
    // s=+1: increase feasible -> multiplier <= grad; decrease -> multiplier >= grad.
    // s=-1 swaps the roles (see stationarity of the Lagrangian).
    const bool gives_upper = (s > 0) ? can_increase : can_decrease;
    const bool gives_lower = (s > 0) ? can_decrease : can_increase;
    if (gives_lower && v > b.m) {
      b.m = v;
      b.i = k;
    }
    if (gives_upper && v < b.M) {
      b.M = v;
      b.j = k;
    }
  }
  return b;
}

}  // namespace

SmoResult solve_smo(const SmoProblem& prob) {
  const int n = static_cast<int>(prob.sign.size());
  if (prob.gram == nullptr || n == 0) throw std::invalid_argument("solve_smo: empty problem");
  const Eigen::MatrixXd& G = *prob.gram;

  SmoResult res;
  res.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = prob.linear;  // gradient at alpha = 0

  const long pass_len = n;
  long iter = 0;
  double pass_max_update = 0.0;
  bool converged = false;
  double gap = 0.0;

  while (iter < prob.max_passes * pass_len) {
    const Bounds b = scan_bounds(grad, prob.sign, res.alpha, prob.upper);
    gap = b.m - b.M;
    if (b.i < 0 || b.j < 0 || gap < prob.tol) {
      converged = true;
      break;
    }

    const int si = prob.sample_of_var[b.i];
    const int sj = prob.sample_of_var[b.j];
    double kappa = G(si, si) + G(sj, sj) - 2.0 * G(si, sj);
    if (kappa <= kCurvatureFloor) kappa = kCurvatureFloor;
    double t = gap / kappa;

    // Box clipping for the step alpha_i -= s_i t, alpha_j += s_j t.
    const double cap_i = prob.sign(b.i) > 0 ? res.alpha(b.i) : prob.upper(b.i) - res.alpha(b.i);
    const double cap_j = prob.sign(b.j) > 0 ? prob.upper(b.j) - res.alpha(b.j) : res.alpha(b.j);
    t = std::min(t, std::min(cap_i, cap_j));
    if (t <= 0.0) {
      converged = true;  // no feasible progress on the worst pair
      break;
    }

    res.alpha(b.i) -= prob.sign(b.i) * t;
    res.alpha(b.j) += prob.sign(b.j) * t;
    res.alpha(b.i) = std::min(std::max(res.alpha(b.i), 0.0), prob.upper(b.i));
    res.alpha(b.j) = std::min(std::max(res.alpha(b.j), 0.0), prob.upper(b.j));

    for (int k = 0; k < n; ++k) {
      const int sk = prob.sample_of_var[k];
      grad(k) += prob.sign(k) * t * (G(sk, sj) - G(sk, si));
    }

    pass_max_update = std::max(pass_max_update, t);
    ++iter;
    if (iter % pass_len == 0) {
      if (pass_max_update < prob.tol) {
        converged = true;
        break;
      }
      pass_max_update = 0.0;
    }
  }

  const Bounds fin = scan_bounds(grad, prob.sign, res.alpha, prob.upper);
  double lo = fin.m, hi = fin.M;
  if (!std::isfinite(lo) && !std::isfinite(hi)) {
    lo = hi = 0.0;
  } else if (!std::isfinite(lo)) {
    lo = hi;
  } else if (!std::isfinite(hi)) {
    hi = lo;
  }
  res.constraint_multiplier = 0.5 * (lo + hi);
  res.iterations = iter;
  res.converged = converged;
  res.kkt_gap = std::isfinite(fin.m - fin.M) ? fin.m - fin.M : 0.0;
  return res;
}

}  // namespace soilspec::detail
