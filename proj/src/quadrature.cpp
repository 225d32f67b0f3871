#include "lrlab/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <queue>
#include <vector>

namespace lrlab::quadrature {

namespace {

// QUADPACK qk15 nodes/weights; odd indices carry the embedded 7-point rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
  double a, b, err;
  T val;
  bool operator<(const Panel& o) const { return err < o.err; }
};

template <class T>
void gk15(const std::function<T(double)>& f, double a, double b, T& val, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T gk = kWgk[7] * f(c);
  T g = kWg[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    double x = h * kXgk[i];
    T s = f(c - x) + f(c + x);
    gk += kWgk[i] * s;
    if (i % 2 == 1) g += kWg[i / 2] * s;
  }
  val = h * gk;
  err = std::abs(h) * std::abs(gk - g);
}

template <class T>
T integrate_impl(const std::function<T(double)>& f, double a, double b,
                 const QuadOptions& opts, long& evals) {
  require(opts.abs_tol > 0, "integrate: tolerance must be positive");
  std::priority_queue<Panel<T>> q;
  Panel<T> p{a, b, 0.0, T{}};
  gk15(f, a, b, p.val, p.err);
  evals += 15;
  q.push(p);
  double total_err = p.err;
  while (total_err > opts.abs_tol) {
    if (evals + 30 > opts.max_evals)
      throw resource_error("integrate: evaluation budget exhausted");
    Panel<T> top = q.top();
    q.pop();
    total_err -= top.err;
    double mid = 0.5 * (top.a + top.b);
    if (mid <= top.a || mid >= top.b)
      throw resource_error("integrate: interval collapsed below machine precision");
    Panel<T> l{top.a, mid, 0.0, T{}}, r{mid, top.b, 0.0, T{}};
    gk15(f, l.a, l.b, l.val, l.err);
    gk15(f, r.a, r.b, r.val, r.err);
    evals += 30;
    total_err += l.err + r.err;
    q.push(l);
    q.push(r);
  }
  T sum{};
  while (!q.empty()) {
    sum += q.top().val;
    q.pop();
  }
  return sum;
}

cd integrate_box_impl(const std::function<cd(const Eigen::VectorXd&)>& f,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                      Eigen::VectorXd& point, int level, const QuadOptions& opts,
                      long& evals) {
  const int d = static_cast<int>(lo.size());
  // inner dimensions get proportionally tighter tolerances
  QuadOptions inner = opts;
  inner.abs_tol = opts.abs_tol / std::max(1.0, hi(level) - lo(level));
  std::function<cd(double)> g;
  if (level == d - 1) {
    g = [&](double x) {
      point(level) = x;
      return f(point);
    };
  } else {
    g = [&](double x) {
      point(level) = x;
      return integrate_box_impl(f, lo, hi, point, level + 1, opts, evals);
    };
  }
  return integrate_impl<cd>(g, lo(level), hi(level), inner, evals);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadOptions& opts) {
  long evals = 0;
  return integrate_impl<double>(f, a, b, opts, evals);
}

cd integrate_c(const std::function<cd(double)>& f, double a, double b,
               const QuadOptions& opts) {
  long evals = 0;
  return integrate_impl<cd>(f, a, b, opts, evals);
}

cd integrate_box(const std::function<cd(const Eigen::VectorXd&)>& f,
                 const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                 const QuadOptions& opts) {
  require(lo.size() == hi.size() && lo.size() >= 1, "integrate_box: bad box");
  long evals = 0;
  Eigen::VectorXd point(lo.size());
  return integrate_box_impl(f, lo, hi, point, 0, opts, evals);
}

namespace {

// Golub-Welsch from the symmetric Jacobi matrix.
void golub_welsch(const Eigen::VectorXd& offdiag, double mu0, Eigen::VectorXd& x,
                  Eigen::VectorXd& w) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = offdiag(i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x = es.eigenvalues();
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double c = es.eigenvectors()(0, i);
    w(i) = mu0 * c * c;
  }
}

}  // namespace

void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  require(n >= 1, "gauss_legendre: n >= 1");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  golub_welsch(off, 2.0, x, w);
}

void gauss_hermite(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  require(n >= 1, "gauss_hermite: n >= 1");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(0.5 * k);
  golub_welsch(off, std::sqrt(lrlab::pi), x, w);
}

}  // namespace lrlab::quadrature
