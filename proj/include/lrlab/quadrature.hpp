#pragma once

#include <Eigen/Core>
#include <functional>

#include "lrlab/common.hpp"

namespace lrlab::quadrature {

struct QuadOptions {
  double abs_tol = 1e-9;
  long max_evals = 10'000'000;
};

// Adaptive Gauss-Kronrod 15(7) on [a, b]. Throws resource_error if the
// evaluation budget runs out before the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadOptions& opts = {});
cd integrate_c(const std::function<cd(double)>& f, double a, double b,
               const QuadOptions& opts = {});

// Tensorized adaptive integration over a box, one adaptive pass per
// dimension, shared evaluation budget.
cd integrate_box(const std::function<cd(const Eigen::VectorXd&)>& f,
                 const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                 const QuadOptions& opts = {});

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w);
// Gauss-Hermite nodes/weights for the weight e^{-x^2} on the line.
void gauss_hermite(int n, Eigen::VectorXd& x, Eigen::VectorXd& w);

}  // namespace lrlab::quadrature
