#include "lrlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace lrlab::quantum {

long SpectralModel::degeneracy(double deg_tol) const {
  long d = 1;
  while (d < evals.size() && evals(d) - evals(0) <= deg_tol) ++d;
  if (!dense && d == evals.size())
    throw resource_error("SpectralModel: retained pairs do not resolve the ground cluster");
  return d;
}

double SpectralModel::gap(double deg_tol) const {
  long d = degeneracy(deg_tol);
  require(d < evals.size(), "gap: no eigenvalue above the ground cluster");
  return evals(d) - evals(0);
}

void SpectralModel::apply(const VectorXcd& x, VectorXcd& y) const {
  y.setZero();
  for (size_t k = 0; k < terms.size(); ++k)
    apply_embedded(terms[k].mat, plans[k], x, y);
}

double SpectralModel::norm_bound() const {
  double s = 0.0;
  for (const auto& T : terms) s += op_norm(T.mat);
  return s;
}

namespace {

std::vector<long> positions_in(const std::vector<long>& region,
                               const std::vector<long>& support) {
  std::vector<long> pos;
  pos.reserve(support.size());
  for (long s : support) {
    auto it = std::find(region.begin(), region.end(), s);
    require(it != region.end(), "assemble: term support outside the site set");
    pos.push_back(it - region.begin());
  }
  return pos;
}

}  // namespace

SpectralModel assemble(const lattice::SiteSet& S, const std::vector<int>& dims,
                       const std::vector<LocalOperator>& terms,
                       const AssembleOptions& opts) {
  require(static_cast<long>(dims.size()) == S.size(),
          "assemble: one local dimension per site expected");
  SpectralModel M;
  M.sites.resize(S.size());
  for (long i = 0; i < S.size(); ++i) M.sites[i] = i;
  M.dims = dims;
  M.terms = terms;
  M.dim = 1;
  for (int d : dims) M.dim *= d;
  for (const auto& T : terms) {
    T.validate();
    for (size_t i = 0; i < T.support.size(); ++i)
      require(T.dims[i] == dims[T.support[i]], "assemble: term dimension mismatch");
    M.plans.push_back(embed_plan(dims, positions_in(M.sites, T.support)));
    double herm = (T.mat - T.mat.adjoint()).cwiseAbs().maxCoeff();
    require(herm <= 1e-12 * std::max(1.0, T.mat.cwiseAbs().maxCoeff()),
            "assemble: non-Hermitian term");
  }

  if (M.dim <= opts.dense_cap) {
    M.dense = true;
    M.H = MatrixXcd::Zero(M.dim, M.dim);
    for (size_t k = 0; k < terms.size(); ++k) M.H += embed(terms[k].mat, M.plans[k]);
    double scale = std::max(1.0, M.H.cwiseAbs().maxCoeff());
    if (M.H.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.H.real());
      require(es.info() == Eigen::Success, "assemble: eigensolver failed");
      M.evals = es.eigenvalues();
      M.evecs = es.eigenvectors().cast<cd>();
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(M.H);
      require(es.info() == Eigen::Success, "assemble: eigensolver failed");
      M.evals = es.eigenvalues();
      M.evecs = es.eigenvectors();
    }
    M.residuals = Eigen::VectorXd::Zero(M.dim);
  } else {
    M.dense = false;
    ApplyFn ap = [&M](const VectorXcd& x, VectorXcd& y) { M.apply(x, y); };
    LanczosOptions lo;
    lo.tol = opts.tol;
    lo.max_iter = opts.max_iter;
    lo.seed = opts.seed;
    auto r = lowest_eigenpairs(ap, M.dim, opts.lowest_k, lo);
    M.evals = r.values;
    M.evecs = r.vectors;
    M.residuals = r.residuals;
  }
  return M;
}

LanczosResult lowest_eigenpairs(const ApplyFn& apply, long dim, int k,
                                const LanczosOptions& opts) {
  require(dim >= 1 && k >= 1 && k <= dim, "lowest_eigenpairs: bad arguments");
  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> g;

  MatrixXcd found(dim, k);
  Eigen::VectorXd values(k), residuals(k);
  double norm_est = 1.0;

  for (int j = 0; j < k; ++j) {
    // fresh start vector, orthogonal to the deflated set
    VectorXcd v(dim);
    for (long i = 0; i < dim; ++i) v[i] = cd(g(rng), g(rng));
    for (int rep = 0; rep < 2; ++rep)
      for (int f = 0; f < j; ++f) v -= found.col(f).dot(v) * found.col(f);
    v.normalize();

    const int m_max = static_cast<int>(std::min<long>(opts.max_iter, dim));
    MatrixXcd V(dim, m_max + 1);
    std::vector<double> alpha, beta;  // tridiagonal entries
    V.col(0) = v;
    VectorXcd w(dim);
    double res_est = 1.0;
    int m = 0;
    Eigen::VectorXd ritz_weights;

    while (m < m_max) {
      apply(V.col(m), w);
      double a = std::real(V.col(m).dot(w));
      alpha.push_back(a);
      w -= a * V.col(m);
      if (m > 0) w -= beta.back() * V.col(m - 1);
      // full reorthogonalisation (twice) against the basis and deflated set
      for (int rep = 0; rep < 2; ++rep) {
        for (int c = 0; c <= m; ++c) w -= V.col(c).dot(w) * V.col(c);
        for (int f = 0; f < j; ++f) w -= found.col(f).dot(w) * found.col(f);
      }
      double b = w.norm();
      ++m;

      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta.size() > size_t(i) ? beta[i] : 0.0;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      ritz_weights = es.eigenvectors().col(0);
      norm_est = std::max({norm_est, std::abs(es.eigenvalues()(0)),
                           std::abs(es.eigenvalues()(m - 1))});
      res_est = b * std::abs(ritz_weights(m - 1));
      if (res_est <= 0.1 * opts.tol * norm_est || b <= 1e-14 * norm_est) break;
      beta.push_back(b);
      V.col(m) = w / b;
    }

    VectorXcd y = V.leftCols(m) * ritz_weights.cast<cd>();
    for (int rep = 0; rep < 2; ++rep)
      for (int f = 0; f < j; ++f) y -= found.col(f).dot(y) * found.col(f);
    y.normalize();
    apply(y, w);
    double lam = std::real(y.dot(w));
    double res = (w - lam * y).norm();
    if (res > opts.tol * std::max(1.0, norm_est))
      throw resource_error("lowest_eigenpairs: iteration cap hit before residual target");
    found.col(j) = y;
    values(j) = lam;
    residuals(j) = res;
  }

  // sort ascending (deflated runs can land slightly out of order for clusters)
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values(a) < values(b); });
  LanczosResult out;
  out.values.resize(k);
  out.vectors.resize(dim, k);
  out.residuals.resize(k);
  for (int i = 0; i < k; ++i) {
    out.values(i) = values(order[i]);
    out.vectors.col(i) = found.col(order[i]);
    out.residuals(i) = residuals(order[i]);
  }
  return out;
}

double hermitian_norm(const ApplyFn& apply, long dim, const LanczosOptions& opts) {
  require(dim >= 1, "hermitian_norm: bad dimension");
  if (dim == 1) {
    VectorXcd x(1), y(1);
    x[0] = 1.0;
    apply(x, y);
    return std::abs(y[0]);
  }
  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> g;
  VectorXcd v(dim);
  for (long i = 0; i < dim; ++i) v[i] = cd(g(rng), g(rng));
  v.normalize();

  const int m_max = static_cast<int>(std::min<long>(opts.max_iter, dim));
  MatrixXcd V(dim, m_max + 1);
  V.col(0) = v;
  std::vector<double> alpha, beta;
  VectorXcd w(dim);
  double cur = 0.0;
  for (int m = 0; m < m_max; ++m) {
    apply(V.col(m), w);
    double a = std::real(V.col(m).dot(w));
    alpha.push_back(a);
    w -= a * V.col(m);
    if (m > 0) w -= beta.back() * V.col(m - 1);
    for (int rep = 0; rep < 2; ++rep)
      for (int c = 0; c <= m; ++c) w -= V.col(c).dot(w) * V.col(c);
    double b = w.norm();

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (int i = 0; i <= m; ++i) {
      T(i, i) = alpha[i];
      if (i < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    int lo = 0, hi = m;
    bool hi_dominant = std::abs(es.eigenvalues()(hi)) >= std::abs(es.eigenvalues()(lo));
    cur = std::abs(es.eigenvalues()(hi_dominant ? hi : lo));
    // |theta - lambda| <= ||Av - theta v|| = b |last Ritz component|
    double res = b * std::abs(es.eigenvectors()(m, hi_dominant ? hi : lo));
    if (b <= 1e-13 * std::max(1.0, cur)) return cur;
    if (res <= 0.3 * opts.tol * std::max(1.0, cur)) return cur;
    beta.push_back(b);
    V.col(m + 1) = w / b;
  }
  return cur;  // estimate at the iteration cap; extreme Ritz values converge first
}

LocalOperator heisenberg_evolve(const SpectralModel& M, const LocalOperator& A,
                                double t) {
  require(M.dense, "heisenberg_evolve: dense spectral data required");
  MatrixXcd EA = embed(A, M.sites, M.dims);
  MatrixXcd Ab = M.evecs.adjoint() * EA * M.evecs;
  VectorXcd ph(M.dim);
  for (long i = 0; i < M.dim; ++i) ph[i] = std::exp(cd(0.0, t * M.evals(i)));
  for (long i = 0; i < M.dim; ++i)
    for (long j = 0; j < M.dim; ++j) Ab(i, j) *= ph[i] * std::conj(ph[j]);
  return local_op(M.sites, M.dims, M.evecs * Ab * M.evecs.adjoint());
}

MatrixXcd gaussian_smooth(const Eigen::VectorXd& gen_evals,
                          const MatrixXcd& gen_evecs, const MatrixXcd& O,
                          double alpha) {
  require(alpha > 0.0, "gaussian_smooth: alpha must be positive");
  require(gen_evecs.rows() == O.rows() && O.rows() == O.cols() &&
              gen_evecs.cols() == gen_evals.size() && gen_evecs.rows() == gen_evecs.cols(),
          "gaussian_smooth: shape mismatch");
  MatrixXcd Ob = gen_evecs.adjoint() * O * gen_evecs;
  for (long i = 0; i < Ob.rows(); ++i)
    for (long j = 0; j < Ob.cols(); ++j) {
      double de = gen_evals(i) - gen_evals(j);
      Ob(i, j) *= std::exp(-de * de / (4.0 * alpha));
    }
  return gen_evecs * Ob * gen_evecs.adjoint();
}

MatrixXcd gaussian_smooth(const SpectralModel& generator, const MatrixXcd& O,
                          double alpha) {
  require(generator.dense, "gaussian_smooth: dense generator required");
  return gaussian_smooth(generator.evals, generator.evecs, O, alpha);
}

GroundSpace ground_space(const SpectralModel& M, double deg_tol) {
  GroundSpace G;
  G.degeneracy = M.degeneracy(deg_tol);
  G.energy = M.ground_energy();
  G.basis = M.evecs.leftCols(G.degeneracy);
  return G;
}

}  // namespace lrlab::quantum
