#include "lrlab/thermolimit.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lrlab/quadrature.hpp"

namespace lrlab::thermolimit {

using Eigen::VectorXd;
using quantum::MatrixXcd;
using quantum::VectorXcd;

namespace {

std::vector<long> coord_key(const lattice::SiteSet& S, const std::vector<long>& support) {
  std::vector<long> key;
  key.reserve(support.size() * S.dim);
  for (long s : support) {
    require(s >= 0 && s < S.size(), "volume family: term support outside its volume");
    for (int j = 0; j < S.dim; ++j) key.push_back(S.sites(s, j));
  }
  return key;
}

std::map<std::vector<long>, MatrixXcd> merged_terms(const lattice::SiteSet& S,
                                                    const lrbounds::Interaction& Phi) {
  std::map<std::vector<long>, MatrixXcd> out;
  for (const auto& T : Phi.terms) {
    auto [it, fresh] = out.try_emplace(coord_key(S, T.support), T.mat);
    if (!fresh) {
      require(it->second.rows() == T.mat.rows(),
              "volume family: duplicate support with mismatched dimension");
      it->second += T.mat;
    }
  }
  return out;
}

// Positions of the listed volume-0 sites inside volume k, coordinate-matched.
std::vector<long> positions_in_volume(const VolumeFamily& fam,
                                      const std::vector<long>& support0, size_t k) {
  std::vector<long> pos;
  pos.reserve(support0.size());
  long prev = -1;
  for (long s : support0) {
    long j = fam.volumes[k].index_of(fam.volumes[0].site(s));
    require(j >= 0, "volume_convergence: observable support missing from a volume");
    require(j > prev, "volume_convergence: site order inconsistent across volumes");
    prev = j;
    pos.push_back(j);
  }
  return pos;
}

VectorXcd phase_vector(const VectorXd& E, double t) {
  VectorXcd ph(E.size());
  for (long i = 0; i < E.size(); ++i) ph(i) = std::exp(cd(0.0, t * E(i)));
  return ph;
}

// e^{itH} A e^{-itH} through the dense eigenpairs; At = V^dag A_emb V.
MatrixXcd evolved_dense(const quantum::SpectralModel& M, const MatrixXcd& At,
                        const MatrixXcd& A_emb, double t) {
  if (t == 0.0) return A_emb;
  VectorXcd ph = phase_vector(M.evals, t);
  return M.evecs * (ph.asDiagonal() * At * ph.conjugate().asDiagonal()) * M.evecs.adjoint();
}

struct PairCtx {
  const quantum::SpectralModel* Mn = nullptr;
  const quantum::SpectralModel* Mm = nullptr;
  quantum::EmbedPlan plan_n_in_m;  // the whole small region inside the large one
  quantum::EmbedPlan plan_A_in_m;
  MatrixXcd A_emb_n, At_n;
  MatrixXcd A_emb_m, At_m;  // dense route only
  MatrixXcd A_mat, A_adj;
  bool dense_route = true;
  bool herm = true;
  quantum::LanczosOptions norm_opts;
};

// || tau^m_t(A) - embed(tau^n_t(A)) || at one time.
double pair_delta(const PairCtx& C, double t) {
  MatrixXcd Bn = evolved_dense(*C.Mn, C.At_n, C.A_emb_n, t);
  if (C.dense_route) {
    MatrixXcd D = evolved_dense(*C.Mm, C.At_m, C.A_emb_m, t) - quantum::embed(Bn, C.plan_n_in_m);
    return quantum::op_norm(D);
  }

  const long dm = C.Mm->dim;
  VectorXcd ph;
  if (t != 0.0) ph = phase_vector(C.Mm->evals, t);
  auto m_side = [&](const MatrixXcd& Asmall, const VectorXcd& x) {
    VectorXcd w;
    if (t == 0.0) {
      w = x;
    } else {
      VectorXcd u = C.Mm->evecs.adjoint() * x;
      u.array() *= ph.conjugate().array();
      w = C.Mm->evecs * u;
    }
    VectorXcd z = VectorXcd::Zero(dm);
    quantum::apply_embedded(Asmall, C.plan_A_in_m, w, z);
    if (t != 0.0) {
      VectorXcd u = C.Mm->evecs.adjoint() * z;
      u.array() *= ph.array();
      z = C.Mm->evecs * u;
    }
    return z;
  };
  quantum::ApplyFn D = [&](const VectorXcd& x, VectorXcd& y) {
    y = m_side(C.A_mat, x);
    VectorXcd zn = VectorXcd::Zero(dm);
    quantum::apply_embedded(Bn, C.plan_n_in_m, x, zn);
    y -= zn;
  };
  if (C.herm) return quantum::hermitian_norm(D, dm, C.norm_opts);

  MatrixXcd BnH = Bn.adjoint();
  quantum::ApplyFn Dadj = [&](const VectorXcd& x, VectorXcd& y) {
    y = m_side(C.A_adj, x);
    VectorXcd zn = VectorXcd::Zero(dm);
    quantum::apply_embedded(BnH, C.plan_n_in_m, x, zn);
    y -= zn;
  };
  quantum::ApplyFn DadjD = [&](const VectorXcd& x, VectorXcd& y) {
    VectorXcd mid(dm);
    D(x, mid);
    Dadj(mid, y);
  };
  return std::sqrt(std::max(0.0, quantum::hermitian_norm(DadjD, dm, C.norm_opts)));
}

bool hermitian(const MatrixXcd& M) {
  return (M - M.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff());
}

}  // namespace

void VolumeFamily::validate() const {
  require(volumes.size() >= 2, "volume family: at least two volumes required");
  require(dims.size() == volumes.size() && interactions.size() == volumes.size(),
          "volume family: one dims vector and one interaction per volume");
  for (size_t k = 0; k < volumes.size(); ++k) {
    require(static_cast<long>(dims[k].size()) == volumes[k].size(),
            "volume family: one local dimension per site");
    for (int d : dims[k]) require(d >= 1, "volume family: local dimensions must be positive");
  }
  for (size_t k = 0; k + 1 < volumes.size(); ++k) {
    const auto& Sn = volumes[k];
    const auto& Sm = volumes[k + 1];
    require(Sn.dim == Sm.dim, "volume family: mixed lattice dimensions");
    require(Sn.size() < Sm.size(), "volume family: nesting must be strict");
    long prev = -1;
    for (long i = 0; i < Sn.size(); ++i) {
      long j = Sm.index_of(Sn.site(i));
      require(j >= 0, "volume family: volumes must nest");
      require(j > prev, "volume family: site order inconsistent across volumes");
      prev = j;
      require(dims[k][i] == dims[k + 1][j], "volume family: local dimension mismatch across volumes");
    }
    auto small = merged_terms(Sn, interactions[k]);
    auto large = merged_terms(Sm, interactions[k + 1]);
    for (const auto& [key, mat] : small) {
      auto it = large.find(key);
      require(it != large.end(), "volume family: interaction term missing on the larger volume");
      require(it->second.rows() == mat.rows(), "volume family: recipe dimensions differ");
      require((it->second - mat).cwiseAbs().maxCoeff() <=
                  1e-12 * std::max(1.0, mat.cwiseAbs().maxCoeff()),
              "volume family: recipe differs between volumes");
    }
    for (const auto& [key, mat] : large) {
      bool interior = true;
      lattice::Coord c(Sn.dim);
      const size_t step = static_cast<size_t>(Sn.dim);
      for (size_t off = 0; off + step <= key.size() && interior; off += step) {
        for (int j = 0; j < Sn.dim; ++j) c(j) = key[off + j];
        interior = Sn.index_of(c) >= 0;
      }
      if (interior)
        require(small.count(key) == 1,
                "volume family: larger volume has an interior term the smaller one lacks");
    }
  }
}

ConvergenceReport volume_convergence(const VolumeFamily& fam, const quantum::LocalOperator& A,
                                     double t_max, const lattice::DecayFunction& F,
                                     const ConvergenceOptions& opts) {
  fam.validate();
  A.validate();
  require(t_max >= 0.0, "volume_convergence: t_max must be nonnegative");
  require(opts.grid >= 2, "volume_convergence: at least two grid points required");
  require(opts.max_doublings >= 0 && opts.grid_tol > 0.0 && opts.eps_num >= 0.0,
          "volume_convergence: bad refinement options");
  for (size_t i = 0; i < A.support.size(); ++i) {
    require(A.support[i] >= 0 && A.support[i] < fam.volumes[0].size(),
            "volume_convergence: observable must live in the smallest volume");
    require(A.dims[i] == fam.dims[0][A.support[i]],
            "volume_convergence: observable dimension mismatch");
  }

  quantum::AssembleOptions aopts;
  for (size_t k = 0; k < fam.volumes.size(); ++k) {
    long dim = 1;
    for (int d : fam.dims[k]) dim *= d;
    if (dim > aopts.dense_cap)
      throw resource_error("volume_convergence: volume dimension above the dense cap");
  }
  std::vector<quantum::SpectralModel> models;
  models.reserve(fam.volumes.size());
  for (size_t k = 0; k < fam.volumes.size(); ++k)
    models.push_back(quantum::assemble(fam.volumes[k], fam.dims[k], fam.interactions[k].terms, aopts));

  ConvergenceReport rep;
  rep.t_max = t_max;
  auto bc = lrbounds::bound_constants(fam.volumes.back(), fam.interactions.back(), F);
  rep.phi_norm = bc.phi_norm;
  rep.conv_C = bc.conv_C;
  const double normA = quantum::op_norm(A.mat);
  double integral = 0.0;  // int_0^T (e^{2||Phi|| C (T-s)} - 1) ds, exactly 0 at T=0 or Phi=0
  if (t_max > 0.0 && bc.phi_norm > 0.0) {
    const double a = 2.0 * bc.phi_norm * bc.conv_C;
    integral = std::expm1(a * t_max) / a - t_max;
  }

  long grid_points = 1;
  bool all_converged = true;
  for (size_t k = 0; k + 1 < fam.volumes.size(); ++k) {
    const auto& Sn = fam.volumes[k];
    const auto& Sm = fam.volumes[k + 1];

    PairCtx C;
    C.Mn = &models[k];
    C.Mm = &models[k + 1];
    C.norm_opts = opts.norm_opts;
    std::vector<long> pos_n(Sn.size());
    for (long i = 0; i < Sn.size(); ++i) pos_n[i] = Sm.index_of(Sn.site(i));
    C.plan_n_in_m = quantum::embed_plan(fam.dims[k + 1], pos_n);
    std::vector<long> posA_m = positions_in_volume(fam, A.support, k + 1);
    std::vector<long> posA_n = positions_in_volume(fam, A.support, k);
    C.plan_A_in_m = quantum::embed_plan(fam.dims[k + 1], posA_m);
    C.A_emb_n = quantum::embed(A.mat, quantum::embed_plan(fam.dims[k], posA_n));
    C.At_n = models[k].evecs.adjoint() * C.A_emb_n * models[k].evecs;
    C.A_mat = A.mat;
    C.herm = hermitian(A.mat);
    if (!C.herm) C.A_adj = A.mat.adjoint();
    C.dense_route = models[k + 1].dim <= 512;
    if (C.dense_route) {
      C.A_emb_m = quantum::embed(A.mat, C.plan_A_in_m);
      C.At_m = models[k + 1].evecs.adjoint() * C.A_emb_m * models[k + 1].evecs;
    }

    double sup = 0.0;
    long g = opts.grid;
    bool conv = true;
    if (t_max == 0.0) {
      sup = pair_delta(C, 0.0);
      g = 1;
    } else {
      std::vector<double> ds(g);
      for (long i = 0; i < g; ++i) {
        ds[i] = pair_delta(C, t_max * double(i) / double(g - 1));
        sup = std::max(sup, ds[i]);
      }
      conv = false;
      for (int r = 0; r < opts.max_doublings && !conv; ++r) {
        const long g2 = 2 * g - 1;
        std::vector<double> ds2(g2);
        double sup2 = sup;
        for (long i = 0; i < g2; ++i) {
          if (i % 2 == 0) {
            ds2[i] = ds[i / 2];
          } else {
            ds2[i] = pair_delta(C, t_max * double(i) / double(g2 - 1));
            sup2 = std::max(sup2, ds2[i]);
          }
        }
        conv = (sup2 - sup) < opts.grid_tol;
        ds.swap(ds2);
        sup = sup2;
        g = g2;
      }
    }
    grid_points = std::max(grid_points, g);
    all_converged = all_converged && conv;

    double ssum = 0.0;
    for (long y = 0; y < Sm.size(); ++y) {
      if (Sn.index_of(Sm.site(y)) >= 0) continue;
      for (long x : posA_m) ssum += F(double(lattice::torus_distance(Sm, x, y)));
    }
    const double tail = 2.0 * normA * bc.phi_norm * integral * ssum;

    VolumeStep step;
    step.n = Sn.size();
    step.m = Sm.size();
    step.delta = sup;
    step.tail = tail;
    step.pass = sup <= tail + opts.eps_num;
    rep.steps.push_back(step);
  }

  rep.grid_points = grid_points;
  rep.grid_converged = all_converged;
  rep.decreasing = true;
  rep.passed = true;
  for (size_t i = 0; i < rep.steps.size(); ++i) {
    if (i > 0 && !(rep.steps[i].delta < rep.steps[i - 1].delta)) rep.decreasing = false;
    if (!rep.steps[i].pass) rep.passed = false;
  }
  return rep;
}

namespace {

lattice::CoordMatrix window_box(int d, long w) {
  long n = 1;
  for (int j = 0; j < d; ++j) n *= 2 * w + 1;
  lattice::CoordMatrix pts(n, d);
  std::vector<long> cur(static_cast<size_t>(d), -w);
  for (long r = 0; r < n; ++r) {
    for (int j = 0; j < d; ++j) pts(r, j) = cur[j];
    for (int j = d - 1; j >= 0; --j) {
      if (++cur[j] <= w) break;
      cur[j] = -w;
    }
  }
  return pts;
}

std::vector<long> row_key(const lattice::CoordMatrix& pts, long r) {
  std::vector<long> key(pts.cols());
  for (long j = 0; j < pts.cols(); ++j) key[j] = pts(r, j);
  return key;
}

}  // namespace

HarmonicConvergence harmonic_volume_convergence(const harmonic::HarmonicSpec& base,
                                                std::span<const long> Ls,
                                                const harmonic::SiteFunction& f, double t,
                                                double quad_tol, double wrap_tol,
                                                double floor) {
  require(!Ls.empty(), "harmonic_volume_convergence: at least one volume required");
  for (size_t i = 0; i < Ls.size(); ++i) {
    require(Ls[i] >= 2, "harmonic_volume_convergence: volumes need L >= 2");
    if (i > 0) require(Ls[i] > Ls[i - 1], "harmonic_volume_convergence: L must increase");
  }
  require(quad_tol > 0.0 && wrap_tol > 0.0 && floor >= 0.0,
          "harmonic_volume_convergence: bad tolerances");

  harmonic::HarmonicSpec inf = base;
  inf.L = 0;
  inf.validate();

  // Shared infinite-volume reference on the largest window, so every step is
  // compared against values carrying one common quadrature error.
  lattice::CoordMatrix big = window_box(inf.d, Ls.back() / 2);
  harmonic::SiteFunction f_inf = harmonic::site_function(inf, f.pts, f.vals);
  harmonic::SiteFunction g_inf = harmonic::apply_Tt_infinite(inf, f_inf, t, big, quad_tol);
  std::map<std::vector<long>, cd> inf_vals;
  for (long r = 0; r < big.rows(); ++r) inf_vals[row_key(big, r)] = g_inf.vals(r);

  HarmonicConvergence rep;
  rep.t = t;
  rep.floor = floor;
  for (long L : Ls) {
    harmonic::HarmonicSpec sL = base;
    sL.L = L;
    sL.validate();
    harmonic::SiteFunction fL = harmonic::site_function(sL, f.pts, f.vals);
    harmonic::SiteFunction gL = harmonic::apply_Tt(sL, fL, t);

    std::map<std::vector<long>, cd> torus_vals;
    for (long r = 0; r < gL.pts.rows(); ++r) torus_vals[row_key(gL.pts, r)] = gL.vals(r);

    HarmonicStep step;
    step.L = L;
    lattice::CoordMatrix win = window_box(sL.d, L / 2);
    double acc = 0.0;
    for (long r = 0; r < win.rows(); ++r) {
      auto key = row_key(win, r);
      auto it = torus_vals.find(key);
      require(it != torus_vals.end(), "harmonic_volume_convergence: window exceeds the torus");
      acc += std::norm(it->second - inf_vals.at(key));
    }
    step.diff = std::sqrt(acc);

    // Wraparound detector: torus amplitude far from the support of f.
    for (long r = 0; r < gL.pts.rows(); ++r) {
      long dist = std::numeric_limits<long>::max();
      for (long s = 0; s < f.pts.rows(); ++s) {
        long d1 = 0;
        for (long j = 0; j < gL.pts.cols(); ++j)
          d1 += std::abs(lattice::torus_wrap(gL.pts(r, j) - f.pts(s, j), L));
        dist = std::min(dist, d1);
      }
      if (4 * dist > 3 * L) step.beyond = std::max(step.beyond, std::abs(gL.vals(r)));
    }
    step.wraparound = step.beyond > wrap_tol;
    rep.steps.push_back(step);
  }

  rep.decreasing = true;
  for (size_t i = 1; i < rep.steps.size(); ++i)
    if (!(rep.steps[i].diff < rep.steps[i - 1].diff || rep.steps[i].diff <= floor))
      rep.decreasing = false;
  return rep;
}

namespace {

// e^{isE_i} M_ij e^{-isE_j}: the free Heisenberg frame in the eigenbasis.
MatrixXcd free_frame(const VectorXd& E, const MatrixXcd& M, double s) {
  VectorXcd ph = phase_vector(E, s);
  return ph.asDiagonal() * M * ph.conjugate().asDiagonal();
}

// R_k(s) = int_s^t [V_I(u), R_{k-1}(u)] du with R_0 constant equal to `core`,
// Gauss-Legendre per level; the order-n term of the expansion is i^n R_n(0).
MatrixXcd dyson_layer(const VectorXd& E, const MatrixXcd& Vt, const MatrixXcd& core, int k,
                      double s, double t, const VectorXd& xg, const VectorXd& wg) {
  if (k == 0) return core;
  const double half = 0.5 * (t - s);
  MatrixXcd acc = MatrixXcd::Zero(core.rows(), core.cols());
  if (half == 0.0) return acc;
  const double mid = 0.5 * (t + s);
  for (long j = 0; j < xg.size(); ++j) {
    const double u = mid + half * xg(j);
    MatrixXcd Vu = free_frame(E, Vt, u);
    MatrixXcd inner = dyson_layer(E, Vt, core, k - 1, u, t, xg, wg);
    acc.noalias() += (half * wg(j)) * (Vu * inner - inner * Vu);
  }
  return acc;
}

}  // namespace

DysonReport dyson_truncation(const quantum::SpectralModel& H0, const quantum::LocalOperator& V,
                             const quantum::LocalOperator& A, double t, int n_max,
                             double eps_num) {
  require(H0.dense, "dyson_truncation: dense spectral data required");
  require(n_max >= 0 && n_max <= 8, "dyson_truncation: n_max out of range");
  require(eps_num >= 0.0, "dyson_truncation: bad tolerance");
  V.validate();
  A.validate();
  require(hermitian(V.mat), "dyson_truncation: perturbation must be Hermitian");

  MatrixXcd A_emb = quantum::embed(A, H0.sites, H0.dims);
  MatrixXcd V_emb = quantum::embed(V, H0.sites, H0.dims);

  // Exact evolution under H0 + V, same eigensolver branch as the assembled model.
  MatrixXcd Hfull = H0.H + V_emb;
  VectorXd Ef;
  MatrixXcd Uf;
  const double scale = std::max(1.0, Hfull.cwiseAbs().maxCoeff());
  if (Hfull.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hfull.real());
    require(es.info() == Eigen::Success, "dyson_truncation: eigensolver failed");
    Ef = es.eigenvalues();
    Uf = es.eigenvectors().cast<cd>();
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Hfull);
    require(es.info() == Eigen::Success, "dyson_truncation: eigensolver failed");
    Ef = es.eigenvalues();
    Uf = es.eigenvectors();
  }
  MatrixXcd exact = Uf * free_frame(Ef, Uf.adjoint() * A_emb * Uf, t) * Uf.adjoint();

  const VectorXd& E0 = H0.evals;
  const MatrixXcd& U0 = H0.evecs;
  MatrixXcd At0 = U0.adjoint() * A_emb * U0;
  MatrixXcd Vt0 = U0.adjoint() * V_emb * U0;
  MatrixXcd core = free_frame(E0, At0, t);

  DysonReport rep;
  MatrixXcd partial = U0 * core * U0.adjoint();
  rep.remainders.push_back(quantum::op_norm(exact - partial));
  const cd ipow[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
  for (int n = 1; n <= n_max; ++n) {
    const int q = std::max(6, 12 - 2 * (n - 1));
    VectorXd xg, wg;
    quadrature::gauss_legendre(q, xg, wg);
    MatrixXcd Rn = dyson_layer(E0, Vt0, core, n, 0.0, t, xg, wg);
    MatrixXcd term = ipow[n % 4] * (U0 * Rn * U0.adjoint());
    rep.term_norms.push_back(quantum::op_norm(term));
    partial += term;
    rep.remainders.push_back(quantum::op_norm(exact - partial));
  }

  const double nv = quantum::op_norm(V.mat);
  const double na = quantum::op_norm(A.mat);
  rep.passed = true;
  for (int n = 0; n <= n_max; ++n) {
    double fact = 1.0;
    for (int j = 2; j <= n + 1; ++j) fact *= j;
    const double tail =
        std::pow(2.0 * nv * std::abs(t), n + 1) / fact * na * std::exp(2.0 * nv * std::abs(t));
    rep.tail_bounds.push_back(tail);
    if (!(rep.remainders[n] <= tail + eps_num)) rep.passed = false;
  }
  return rep;
}

}  // namespace lrlab::thermolimit
