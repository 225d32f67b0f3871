#include "lrlab/harmonic.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

#include "lrlab/operators.hpp"
#include "lrlab/quadrature.hpp"

namespace lrlab::harmonic {

namespace {

lattice::SiteSet torus_of(const HarmonicSpec& spec) {
  return lattice::torus(spec.d, spec.L);
}

// Dual momenta share the torus index structure: k(m) = pi m / L.
VectorXd momentum(const HarmonicSpec& spec, const lattice::Coord& m) {
  VectorXd k(spec.d);
  for (int j = 0; j < spec.d; ++j) k(j) = pi * double(m(j)) / double(spec.L);
  return k;
}

long l1_norm(const lattice::Coord& x) {
  long s = 0;
  for (Eigen::Index j = 0; j < x.size(); ++j) s += std::abs(x(j));
  return s;
}

double site_distance(const HarmonicSpec& spec, const lattice::Coord& a,
                     const lattice::Coord& b) {
  long s = 0;
  for (int j = 0; j < spec.d; ++j) {
    long v = a(j) - b(j);
    if (spec.finite()) v = lattice::torus_wrap(v, spec.L);
    s += std::abs(v);
  }
  return double(s);
}

// Complex convolution factors of the flow: A = h0 - i(hm1 + hp1)/2 applied to
// f, B = i(hp1 - hm1)/2 applied to conj(f).
std::pair<VectorXcd, VectorXcd> kernel_factors(const KernelTriple& ker) {
  VectorXcd A = ker.h0.cast<cd>() - cd(0, 0.5) * (ker.hm1 + ker.hp1).cast<cd>();
  VectorXcd B = cd(0, 0.5) * (ker.hp1 - ker.hm1).cast<cd>();
  return {A, B};
}

MatrixXcd fourier_matrix(const HarmonicSpec& spec, const lattice::SiteSet& S) {
  const long n = S.size();
  MatrixXcd F(n, n);
  const double scale = 1.0 / std::sqrt(double(n));
  for (long a = 0; a < n; ++a) {
    VectorXd k = momentum(spec, S.site(a));
    for (long b = 0; b < n; ++b) {
      double phase = 0.0;
      for (int j = 0; j < spec.d; ++j) phase += k(j) * double(S.site(b)(j));
      F(a, b) = std::polar(scale, -phase);
    }
  }
  return F;
}

VectorXd dispersion_diagonal(const HarmonicSpec& spec, const lattice::SiteSet& S) {
  VectorXd g(S.size());
  for (long a = 0; a < S.size(); ++a) g(a) = dispersion(spec, momentum(spec, S.site(a)));
  return g;
}

SiteFunction dense_function(const lattice::SiteSet& S, VectorXcd vals) {
  SiteFunction out;
  out.pts = S.sites;
  out.vals = std::move(vals);
  return out;
}

}  // namespace

long HarmonicSpec::volume() const {
  long v = 1;
  for (int j = 0; j < d; ++j) v *= 2 * L;
  return v;
}

double HarmonicSpec::c() const {
  double s = omega * omega;
  for (double l : lambda) s += 4.0 * l;
  return std::sqrt(s);
}

void HarmonicSpec::validate() const {
  require(d >= 1, "HarmonicSpec: dimension must be >= 1");
  require(L >= 0, "HarmonicSpec: negative torus half-width");
  require(omega > 0.0, "HarmonicSpec: on-site frequency must be positive");
  require(lambda.size() == size_t(d), "HarmonicSpec: one coupling per axis");
  for (double l : lambda) require(l >= 0.0, "HarmonicSpec: negative coupling");
}

SiteFunction site_function(const HarmonicSpec& spec, lattice::CoordMatrix pts,
                           VectorXcd vals) {
  spec.validate();
  require(pts.rows() == vals.size(), "site_function: size mismatch");
  require(pts.cols() == spec.d, "site_function: coordinate dimension mismatch");
  if (spec.finite())
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
      for (int j = 0; j < spec.d; ++j)
        pts(i, j) = lattice::torus_wrap(pts(i, j), spec.L);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index k = i + 1; k < pts.rows(); ++k)
      require(!(pts.row(i).array() == pts.row(k).array()).all(),
              "site_function: duplicate site");
  SiteFunction f;
  f.pts = std::move(pts);
  f.vals = std::move(vals);
  return f;
}

SiteFunction delta(const HarmonicSpec& spec, const lattice::Coord& x, cd amp) {
  lattice::CoordMatrix pts(1, spec.d);
  pts.row(0) = x;
  VectorXcd vals(1);
  vals(0) = amp;
  return site_function(spec, std::move(pts), std::move(vals));
}

double dispersion(const HarmonicSpec& spec, const VectorXd& k) {
  require(k.size() == spec.d, "dispersion: momentum dimension mismatch");
  double s = spec.omega * spec.omega;
  for (int j = 0; j < spec.d; ++j) {
    double sj = std::sin(k(j) / 2.0);
    s += 4.0 * spec.lambda[j] * sj * sj;
  }
  return std::sqrt(s);
}

double velocity(const HarmonicSpec& spec, double mu) {
  require(mu > 0.0, "velocity: mu must be positive");
  return spec.c() * std::max(2.0 / mu, std::exp(mu / 2.0 + 1.0));
}

KernelTriple kernels_finite(const HarmonicSpec& spec, double t) {
  spec.validate();
  require(spec.finite(), "kernels_finite: finite volume required");
  auto S = torus_of(spec);
  const long n = S.size();
  VectorXd gamma = dispersion_diagonal(spec, S);
  VectorXcd rot(n);
  for (long a = 0; a < n; ++a) rot(a) = std::polar(1.0, -2.0 * gamma(a) * t);

  KernelTriple ker;
  ker.sites = S;
  ker.t = t;
  ker.hm1.resize(n);
  ker.h0.resize(n);
  ker.hp1.resize(n);
  for (long i = 0; i < n; ++i) {
    cd am1 = 0, a0 = 0, ap1 = 0;
    for (long a = 0; a < n; ++a) {
      double kx = 0.0;
      VectorXd k = momentum(spec, S.site(a));
      for (int j = 0; j < spec.d; ++j) kx += k(j) * double(S.site(i)(j));
      cd ph = std::polar(1.0, kx) * rot(a);
      am1 += ph / gamma(a);
      a0 += ph;
      ap1 += ph * gamma(a);
    }
    ker.hm1(i) = am1.imag() / double(n);
    ker.h0(i) = a0.real() / double(n);
    ker.hp1(i) = ap1.imag() / double(n);
  }
  return ker;
}

KernelPoint kernels_infinite(const HarmonicSpec& spec, double t,
                             const lattice::Coord& x, double tol, long budget) {
  spec.validate();
  require(x.size() == spec.d, "kernels_infinite: coordinate dimension mismatch");
  VectorXd lo = VectorXd::Constant(spec.d, -pi);
  VectorXd hi = VectorXd::Constant(spec.d, pi);
  quadrature::QuadOptions opts;
  opts.abs_tol = tol;
  opts.max_evals = budget;
  auto moment = [&](int a) {
    return quadrature::integrate_box(
        [&](const VectorXd& k) {
          double kx = 0.0;
          for (int j = 0; j < spec.d; ++j) kx += k(j) * double(x(j));
          double g = dispersion(spec, k);
          return std::pow(g, a) * std::polar(1.0, kx - 2.0 * g * t);
        },
        lo, hi, opts);
  };
  double norm = std::pow(2.0 * pi, -spec.d);
  KernelPoint p;
  p.hm1 = norm * moment(-1).imag();
  p.h0 = norm * moment(0).real();
  p.hp1 = norm * moment(1).imag();
  return p;
}

SiteFunction apply_Tt(const HarmonicSpec& spec, const SiteFunction& f, double t) {
  auto ker = kernels_finite(spec, t);
  auto [A, B] = kernel_factors(ker);
  const long n = ker.sites.size();
  VectorXcd out = VectorXcd::Zero(n);
  for (long i = 0; i < n; ++i) {
    lattice::Coord x = ker.sites.site(i);
    cd acc = 0;
    for (long j = 0; j < f.size(); ++j) {
      lattice::Coord diff = x - f.pts.row(j);
      long idx = ker.sites.index_of(diff);
      acc += f.vals(j) * A(idx) + std::conj(f.vals(j)) * B(idx);
    }
    out(i) = acc;
  }
  return dense_function(ker.sites, std::move(out));
}

SiteFunction apply_Tt_infinite(const HarmonicSpec& spec, const SiteFunction& f,
                               double t, const lattice::CoordMatrix& out,
                               double tol) {
  spec.validate();
  require(!spec.finite(), "apply_Tt_infinite: infinite-volume spec required");
  require(out.cols() == spec.d, "apply_Tt_infinite: coordinate dimension mismatch");
  double ktol = tol / (4.0 * std::max(1.0, f.l1()));
  VectorXcd vals = VectorXcd::Zero(out.rows());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    cd acc = 0;
    for (long j = 0; j < f.size(); ++j) {
      lattice::Coord diff = out.row(i) - f.pts.row(j);
      KernelPoint p = kernels_infinite(spec, t, diff, ktol);
      cd A = cd(p.h0, 0) - cd(0, 0.5) * cd(p.hm1 + p.hp1, 0);
      cd B = cd(0, 0.5) * cd(p.hp1 - p.hm1, 0);
      acc += f.vals(j) * A + std::conj(f.vals(j)) * B;
    }
    vals(i) = acc;
  }
  SiteFunction g;
  g.pts = out;
  g.vals = std::move(vals);
  return g;
}

namespace {

// Coupling matrix of the quadratic form: omega^2 + lattice Laplacian terms.
Eigen::MatrixXd coupling_matrix(const HarmonicSpec& spec, const lattice::SiteSet& S) {
  const long n = S.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  M.diagonal().setConstant(spec.omega * spec.omega);
  for (int j = 0; j < spec.d; ++j) {
    if (spec.lambda[j] == 0.0) continue;
    for (long i = 0; i < n; ++i) {
      lattice::Coord nb = S.site(i);
      nb(j) += 1;
      long idx = S.index_of(nb);
      M(i, i) += 2.0 * spec.lambda[j];
      M(i, idx) -= spec.lambda[j];
      M(idx, i) -= spec.lambda[j];
    }
  }
  return M;
}

}  // namespace

SiteFunction symplectic_oracle(const HarmonicSpec& spec, const SiteFunction& f,
                               double t) {
  spec.validate();
  require(spec.finite(), "symplectic_oracle: finite volume required");
  auto S = torus_of(spec);
  const long n = S.size();
  if (n > 4096) throw resource_error("symplectic_oracle: volume exceeds 4096 sites");

  Eigen::MatrixXd M = coupling_matrix(spec, S);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  K.topRightCorner(n, n) = -2.0 * M;
  K.bottomLeftCorner(n, n) = 2.0 * Eigen::MatrixXd::Identity(n, n);

  VectorXcd dense = dense_values(spec, f);
  Eigen::VectorXd v(2 * n);
  v.head(n) = dense.real();
  v.tail(n) = dense.imag();
  Eigen::VectorXd w = (t * K).exp() * v;
  VectorXcd vals = w.head(n).cast<cd>() + cd(0, 1) * w.tail(n).cast<cd>();
  return dense_function(S, std::move(vals));
}

SiteFunction flow_derivative(const HarmonicSpec& spec, const SiteFunction& f) {
  spec.validate();
  require(spec.finite(), "flow_derivative: finite volume required");
  auto S = torus_of(spec);
  Eigen::MatrixXd M = coupling_matrix(spec, S);
  VectorXcd dense = dense_values(spec, f);
  Eigen::VectorXd re = dense.real(), im = dense.imag();
  Eigen::VectorXd dre = -2.0 * (M * im);
  Eigen::VectorXd dim = 2.0 * re;
  return dense_function(S, dre.cast<cd>() + cd(0, 1) * dim.cast<cd>());
}

BogoliubovPair bogoliubov_pair(const HarmonicSpec& spec) {
  spec.validate();
  require(spec.finite(), "bogoliubov_pair: finite volume required");
  auto S = torus_of(spec);
  if (S.size() > 4096) throw resource_error("bogoliubov_pair: volume exceeds 4096 sites");
  MatrixXcd F = fourier_matrix(spec, S);
  VectorXd gamma = dispersion_diagonal(spec, S);
  VectorXcd gp(gamma.size()), gm(gamma.size());
  for (long a = 0; a < gamma.size(); ++a) {
    double root = std::sqrt(gamma(a));
    gp(a) = cd(0, 0.5) * cd(1.0 / root + root, 0);
    gm(a) = cd(0, 0.5) * cd(1.0 / root - root, 0);
  }
  BogoliubovPair P;
  P.U = F.adjoint() * gp.asDiagonal() * F;
  P.B = F.adjoint() * gm.asDiagonal() * F;
  return P;
}

BogoliubovResiduals bogoliubov_residuals(const HarmonicSpec& spec) {
  auto P = bogoliubov_pair(spec);
  const long n = P.U.rows();
  MatrixXcd unit = P.U.adjoint() * P.U - P.B.transpose() * P.B.conjugate() -
                   MatrixXcd::Identity(n, n);
  MatrixXcd cross = P.B.transpose() * P.U.conjugate() - P.U.adjoint() * P.B;
  BogoliubovResiduals r;
  r.unit = quantum::op_norm(unit);
  r.cross = quantum::op_norm(cross);
  return r;
}

SiteFunction bogoliubov_Tt(const HarmonicSpec& spec, const SiteFunction& f,
                           double t) {
  auto P = bogoliubov_pair(spec);
  auto S = torus_of(spec);
  const MatrixXcd F = fourier_matrix(spec, S);
  VectorXd gamma = dispersion_diagonal(spec, S);
  VectorXcd dense = dense_values(spec, f);
  VectorXcd g = P.U.adjoint() * dense - P.B.transpose() * dense.conjugate();
  VectorXcd ghat = F * g;
  for (long a = 0; a < gamma.size(); ++a)
    ghat(a) *= std::polar(1.0, 2.0 * gamma(a) * t);
  VectorXcd h = F.adjoint() * ghat;
  VectorXcd out = P.U * h + P.B * h.conjugate();
  return dense_function(S, std::move(out));
}

VectorXcd dense_values(const HarmonicSpec& spec, const SiteFunction& f) {
  require(spec.finite(), "dense_values: finite volume required");
  auto S = torus_of(spec);
  VectorXcd v = VectorXcd::Zero(S.size());
  for (long j = 0; j < f.size(); ++j) {
    long idx = S.index_of(f.pts.row(j));
    require(idx >= 0, "dense_values: site outside the torus");
    v(idx) += f.vals(j);
  }
  return v;
}

cd weyl_inner(const SiteFunction& f, const SiteFunction& g) {
  cd acc = 0;
  for (long i = 0; i < f.size(); ++i)
    for (long j = 0; j < g.size(); ++j)
      if ((f.pts.row(i).array() == g.pts.row(j).array()).all())
        acc += std::conj(f.vals(i)) * g.vals(j);
  return acc;
}

double weyl_commutator_norm(const HarmonicSpec& spec, const SiteFunction& f,
                            const SiteFunction& g, double t) {
  auto ft = apply_Tt(spec, f, t);
  double im = weyl_inner(ft, g).imag();
  return 2.0 * std::abs(std::sin(im / 2.0));
}

double evolved_overlap(const HarmonicSpec& spec, const SiteFunction& f,
                       const SiteFunction& g, double t) {
  auto ft = apply_Tt(spec, f, t);
  auto S = torus_of(spec);
  double acc = 0.0;
  for (long j = 0; j < g.size(); ++j) {
    long idx = S.index_of(g.pts.row(j));
    acc += std::abs(ft.vals(idx)) * std::abs(g.vals(j));
  }
  return acc;
}

double harmonic_bound(const HarmonicSpec& spec, const SiteFunction& f,
                      const SiteFunction& g, double t, double mu) {
  spec.validate();
  require(mu > 0.0, "harmonic_bound: mu must be positive");
  double c = spec.c();
  double C = 1.0 + c * std::exp(mu / 2.0) + 1.0 / c;
  double v = velocity(spec, mu);
  double acc = 0.0;
  for (long i = 0; i < f.size(); ++i)
    for (long j = 0; j < g.size(); ++j) {
      double dxy = site_distance(spec, f.pts.row(i), g.pts.row(j));
      acc += std::abs(f.vals(i)) * std::abs(g.vals(j)) *
             std::exp(-mu * (dxy - v * std::abs(t)));
    }
  return C * acc;
}

double envelope_sup(int d, double eps) {
  require(eps > 0.0, "envelope_sup: eps must be positive");
  double p = double(d + 1);
  if (eps >= p) return 1.0;
  return std::exp(eps - p) * std::pow(p / eps, p);
}

double corollary_constant(const HarmonicSpec& spec, double eps, double mu) {
  spec.validate();
  require(mu > 0.0, "corollary_constant: mu must be positive");
  double c = spec.c();
  return (1.0 + c * std::exp((mu + eps) / 2.0) + 1.0 / c) * envelope_sup(spec.d, eps);
}

double corollary_bound(const HarmonicSpec& spec, const SiteFunction& f,
                       const SiteFunction& g, double t, double mu, double eps) {
  double C = corollary_constant(spec, eps, mu);
  double v = velocity(spec, mu + eps);
  lattice::DecayFunction F{spec.d, mu};
  double acc = 0.0;
  for (long i = 0; i < f.size(); ++i)
    for (long j = 0; j < g.size(); ++j)
      acc += std::abs(f.vals(i)) * std::abs(g.vals(j)) *
             F(site_distance(spec, f.pts.row(i), g.pts.row(j)));
  return C * std::exp((mu + eps) * v * std::abs(t)) * acc;
}

DecayReport check_kernel_decay(const HarmonicSpec& spec, const KernelTriple& ker,
                               double mu, double tol) {
  require(mu > 0.0, "check_kernel_decay: mu must be positive");
  double c = spec.c();
  double v = velocity(spec, mu);
  DecayReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < ker.sites.size(); ++i) {
    double base = std::exp(-mu * (double(l1_norm(ker.sites.site(i))) -
                                  v * std::abs(ker.t)));
    double ex[3] = {std::abs(ker.hm1(i)) - base / c, std::abs(ker.h0(i)) - base,
                    std::abs(ker.hp1(i)) - c * std::exp(mu / 2.0) * base};
    for (int m = 0; m < 3; ++m)
      if (ex[m] > rep.max_excess) {
        rep.max_excess = ex[m];
        rep.worst_site = i;
        rep.worst_kernel = m - 1;
      }
  }
  rep.pass = rep.max_excess <= tol;
  return rep;
}

DecayReport kernel_decay_check(const HarmonicSpec& spec, double t, double mu,
                               double tol) {
  return check_kernel_decay(spec, kernels_finite(spec, t), mu, tol);
}

cd vacuum_weyl_expectation(const HarmonicSpec& spec,
                           const std::vector<SiteFunction>& fs) {
  spec.validate();
  require(spec.finite(), "vacuum_weyl_expectation: finite volume required");
  auto S = torus_of(spec);
  VectorXcd h = VectorXcd::Zero(S.size());
  cd phase = 1.0;
  for (const auto& f : fs) {
    VectorXcd v = dense_values(spec, f);
    double im = h.dot(v).imag();  // <h, v> with Eigen's conjugate-first dot
    phase *= std::polar(1.0, -im / 2.0);
    h += v;
  }
  auto P = bogoliubov_pair(spec);
  VectorXcd w = P.U.adjoint() * h - P.B.transpose() * h.conjugate();
  return phase * std::exp(-0.25 * w.squaredNorm());
}

}  // namespace lrlab::harmonic
