#include "lrlab/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrlab::clustering {

using quantum::LocalOperator;
using quantum::MatrixXcd;
using quantum::VectorXcd;

namespace {

quantum::EmbedPlan plan_for(const quantum::SpectralModel& M, const LocalOperator& A) {
  std::vector<long> pos(A.support.size());
  for (size_t k = 0; k < A.support.size(); ++k) {
    auto it = std::find(M.sites.begin(), M.sites.end(), A.support[k]);
    require(it != M.sites.end(), "clustering: operator support outside the model");
    pos[k] = it - M.sites.begin();
    require(M.dims[pos[k]] == A.dims[k], "clustering: local dimension mismatch");
  }
  return quantum::embed_plan(M.dims, pos);
}

VectorXcd apply_local(const MatrixXcd& mat, const quantum::EmbedPlan& plan,
                      const VectorXcd& x) {
  VectorXcd y = VectorXcd::Zero(x.size());
  quantum::apply_embedded(mat, plan, x, y);
  return y;
}

LocalOperator translate(const lattice::SiteSet& S, const LocalOperator& B, long r) {
  std::vector<long> sup(B.support.size());
  for (size_t k = 0; k < B.support.size(); ++k) {
    lattice::Coord c = S.site(B.support[k]);
    c(0) += r;
    long idx = S.index_of(c);
    require(idx >= 0, "verify_clustering: translation leaves the lattice");
    sup[k] = idx;
  }
  for (size_t k = 1; k < sup.size(); ++k)
    require(sup[k - 1] < sup[k], "verify_clustering: translation scrambles the support");
  return quantum::local_op(std::move(sup), B.dims, B.mat);
}

void check_increasing(std::span<const long> v, const char* what) {
  for (size_t k = 1; k < v.size(); ++k)
    require(v[k - 1] < v[k], what);
}

harmonic::SiteFunction shift(const harmonic::HarmonicSpec& spec,
                             const harmonic::SiteFunction& g, long r) {
  lattice::CoordMatrix pts = g.pts;
  pts.col(0).array() += r;
  return harmonic::site_function(spec, std::move(pts), g.vals);
}

long support_distance(const harmonic::HarmonicSpec& spec,
                      const harmonic::SiteFunction& f,
                      const harmonic::SiteFunction& g) {
  long best = std::numeric_limits<long>::max();
  for (Eigen::Index i = 0; i < f.pts.rows(); ++i)
    for (Eigen::Index j = 0; j < g.pts.rows(); ++j) {
      long acc = 0;
      for (int c = 0; c < spec.d; ++c) {
        long dv = f.pts(i, c) - g.pts(j, c);
        if (spec.finite()) dv = lattice::torus_wrap(dv, spec.L);
        acc += dv < 0 ? -dv : dv;
      }
      best = std::min(best, acc);
    }
  return best;
}

}  // namespace

FitResult fit_decay(std::span<const long> distances, std::span<const cd> values,
                    double floor) {
  require(distances.size() == values.size(), "fit_decay: size mismatch");
  require(floor >= 0.0, "fit_decay: floor must be nonnegative");
  std::vector<double> x, y;
  for (size_t i = 0; i < values.size(); ++i) {
    double m = std::abs(values[i]);
    if (m > floor) {
      x.push_back(double(distances[i]));
      y.push_back(std::log(m));
    }
  }
  FitResult out;
  out.n_used = long(x.size());
  if (x.empty()) return out;
  if (x.size() == 1) {
    out.log_prefactor = y[0];
    return out;
  }
  const double n = double(x.size());
  double xm = 0.0, ym = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  require(sxx > 0.0, "fit_decay: distances above the floor are all equal");
  const double slope = sxy / sxx;
  out.rate = -slope;
  out.log_prefactor = ym - slope * xm;
  double rss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (out.log_prefactor + slope * x[i]);
    rss += r * r;
  }
  out.residual = std::sqrt(rss / n);
  out.rate_uncertainty = x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return out;
}

cd truncated_correlation(const quantum::SpectralModel& M, const LocalOperator& A,
                         const LocalOperator& B, double deg_tol) {
  A.validate();
  B.validate();
  require(deg_tol >= 0.0, "truncated_correlation: bad tolerance");
  long deg = M.degeneracy(deg_tol);
  if (deg != 1)
    throw domain_error("truncated_correlation: ground space is " +
                       std::to_string(deg) + "-fold degenerate within tolerance");
  const VectorXcd psi = M.evecs.col(0);
  auto planA = plan_for(M, A);
  auto planB = plan_for(M, B);
  VectorXcd Apsi = apply_local(A.mat, planA, psi);
  VectorXcd Bpsi = apply_local(B.mat, planB, psi);
  VectorXcd Adpsi = apply_local(A.mat.adjoint(), planA, psi);
  return Adpsi.dot(Bpsi) - psi.dot(Apsi) * psi.dot(Bpsi);
}

double clustering_rate_bound(double a, double gamma, double phi_a) {
  require(a > 0.0 && gamma > 0.0 && phi_a > 0.0,
          "clustering_rate_bound: inputs must be positive");
  return a * gamma / (gamma + 4.0 * phi_a);
}

ClusteringReport verify_clustering(const lattice::SiteSet& S,
                                   const quantum::SpectralModel& M,
                                   const LocalOperator& A, const LocalOperator& B,
                                   std::span<const long> translations,
                                   const ClusteringOptions& opts) {
  require(S.size() == long(M.sites.size()),
          "verify_clustering: model does not match the site set");
  require(!translations.empty(), "verify_clustering: no translations");
  require(!opts.a_grid.empty(), "verify_clustering: empty certificate grid");
  check_increasing(translations, "verify_clustering: translations must increase");

  ClusteringReport rep;
  for (long r : translations) {
    LocalOperator Br = translate(S, B, r);
    rep.series.values.push_back(truncated_correlation(M, A, Br, opts.deg_tol));
    rep.series.distances.push_back(lattice::set_distance(S, A.support, Br.support));
  }
  check_increasing(rep.series.distances,
                   "verify_clustering: translated distances must increase");
  rep.series.fit = fit_decay(rep.series.distances, rep.series.values, opts.floor);

  rep.gap = M.gap(opts.deg_tol);
  lrbounds::Interaction Phi{M.terms};
  for (double a : opts.a_grid) {
    double pa = lrbounds::interaction_norm(S, Phi, lattice::DecayFunction{S.dim, a});
    double mu = clustering_rate_bound(a, rep.gap, pa);
    if (mu > rep.theorem_mu) {
      rep.theorem_mu = mu;
      rep.best_a = a;
      rep.phi_a = pa;
    }
  }

  const FitResult& fit = rep.series.fit;
  rep.inconclusive = fit.n_used >= 2 && fit.residual > opts.residual_cap;
  rep.vacuous = fit.n_used == 0 ||
                rep.theorem_mu <= std::max(opts.vacuous_tol, fit.rate_uncertainty);
  rep.rate_pass = rep.vacuous || rep.inconclusive ||
                  fit.rate >= rep.theorem_mu - fit.rate_uncertainty - opts.eps_num;

  const double chat = std::abs(rep.series.values.front()) *
                      std::exp(rep.theorem_mu * double(rep.series.distances.front()));
  rep.pointwise_c = chat;
  double excess = 0.0;
  for (size_t k = 0; k < rep.series.values.size(); ++k)
    excess = std::max(excess,
                      std::abs(rep.series.values[k]) -
                          chat * std::exp(-rep.theorem_mu *
                                          double(rep.series.distances[k])));
  rep.max_pointwise_excess = excess;
  rep.pointwise_pass = excess <= opts.eps_num;
  rep.passed = rep.rate_pass && rep.pointwise_pass;
  rep.caveat =
      "gap is the finite-volume value of the assembled model; the certificate "
      "treats it as the spectral gap";
  return rep;
}

HarmonicClusteringReport harmonic_clustering(
    const harmonic::HarmonicSpec& spec, const harmonic::SiteFunction& f,
    const harmonic::SiteFunction& g, std::span<const long> separations, double a,
    double v, double gamma, const ClusteringOptions& opts) {
  spec.validate();
  require(spec.finite(), "harmonic_clustering: finite volume required");
  require(a > 0.0 && v > 0.0 && gamma > 0.0,
          "harmonic_clustering: a, v, gamma must be positive");
  require(!separations.empty(), "harmonic_clustering: no separations");
  check_increasing(separations, "harmonic_clustering: separations must increase");

  HarmonicClusteringReport rep;
  rep.xi = (4.0 * a * v + gamma) / (a * gamma);
  rep.theorem_rate = 1.0 / rep.xi;

  const cd wf = harmonic::vacuum_weyl_expectation(spec, {f});
  for (long r : separations) {
    auto gr = shift(spec, g, r);
    cd joint = harmonic::vacuum_weyl_expectation(spec, {f, gr});
    cd wg = harmonic::vacuum_weyl_expectation(spec, {gr});
    rep.series.values.push_back(joint - wf * wg);
    rep.series.distances.push_back(support_distance(spec, f, gr));
  }
  check_increasing(rep.series.distances,
                   "harmonic_clustering: separations wrap around the torus");
  rep.series.fit = fit_decay(rep.series.distances, rep.series.values, opts.floor);

  const FitResult& fit = rep.series.fit;
  rep.inconclusive = fit.n_used >= 2 && fit.residual > opts.residual_cap;
  rep.vacuous = fit.n_used == 0 ||
                rep.theorem_rate <= std::max(opts.vacuous_tol, fit.rate_uncertainty);
  rep.rate_pass = rep.vacuous || rep.inconclusive ||
                  fit.rate >= rep.theorem_rate - fit.rate_uncertainty - opts.eps_num;
  rep.passed = rep.rate_pass;
  return rep;
}

}  // namespace lrlab::clustering
