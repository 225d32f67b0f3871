#include "lrlab/gappedapprox.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lrlab/quadrature.hpp"

namespace lrlab::gapped {

namespace {

constexpr long kFar = std::numeric_limits<long>::max() / 4;

std::vector<long> sorted_sites(const lattice::SiteSet& S, std::span<const long> raw,
                               const char* who) {
  std::vector<long> out(raw.begin(), raw.end());
  std::sort(out.begin(), out.end());
  require(!out.empty(), std::string(who) + ": empty site list");
  require(out.front() >= 0 && out.back() < S.size(),
          std::string(who) + ": site index out of range");
  require(std::adjacent_find(out.begin(), out.end()) == out.end(),
          std::string(who) + ": duplicate site");
  return out;
}

std::vector<char> membership(long n, const std::vector<long>& sites) {
  std::vector<char> in(n, 0);
  for (long x : sites) in[x] = 1;
  return in;
}

long dist_to(const lattice::SiteSet& S, long x, const std::vector<long>& set) {
  long d = kFar;
  for (long s : set) d = std::min(d, lattice::torus_distance(S, x, s));
  return d;
}

std::vector<int> region_dims(const quantum::SpectralModel& M,
                             const std::vector<long>& R) {
  std::vector<int> d(R.size());
  for (size_t i = 0; i < R.size(); ++i) d[i] = M.dims[R[i]];
  return d;
}

bool subset_of(const std::vector<long>& support, const std::vector<char>& in) {
  return std::all_of(support.begin(), support.end(),
                     [&](long s) { return in[s]; });
}

std::vector<long> positions_in(const std::vector<long>& R,
                               const std::vector<long>& support) {
  std::vector<long> pos(support.size());
  for (size_t i = 0; i < support.size(); ++i) {
    auto it = std::lower_bound(R.begin(), R.end(), support[i]);
    require(it != R.end() && *it == support[i],
            "gapped: term support not contained in its region");
    pos[i] = it - R.begin();
  }
  return pos;
}

// Sum of the selected model terms embedded on the subsystem spanned by R.
MatrixXcd assemble_on(const quantum::SpectralModel& M, const std::vector<long>& R,
                      const std::vector<int>& dims_R,
                      const std::vector<size_t>& which) {
  long dim = 1;
  for (int d : dims_R) dim *= d;
  MatrixXcd H = MatrixXcd::Zero(dim, dim);
  for (size_t k : which) {
    const auto& T = M.terms[k];
    H += quantum::embed(T.mat, quantum::embed_plan(dims_R, positions_in(R, T.support)));
  }
  return H;
}

struct EigPair {
  Eigen::VectorXd evals;
  MatrixXcd evecs;
};

EigPair sym_eig(const MatrixXcd& H) {
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  require((H - H.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "gapped: Hermitian matrix expected");
  if (H.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.real());
    require(es.info() == Eigen::Success, "gapped: eigendecomposition failed");
    return {es.eigenvalues(), es.eigenvectors().cast<cd>()};
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  require(es.info() == Eigen::Success, "gapped: eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

MatrixXcd embed_full(const quantum::SpectralModel& M, const quantum::LocalOperator& K) {
  return quantum::embed(K, M.sites, M.dims);
}

VectorXcd apply_on(const quantum::SpectralModel& M, const quantum::LocalOperator& K,
                   const VectorXcd& x) {
  VectorXcd y = VectorXcd::Zero(x.size());
  quantum::apply_embedded(K.mat, quantum::embed_plan(M.dims, K.support), x, y);
  return y;
}

}  // namespace

RegionSplit region_split(const lattice::SiteSet& S, std::span<const long> region,
                         long ell) {
  require(ell >= 1, "region_split: collar radius must be at least 1");
  RegionSplit sp;
  sp.ell = ell;
  sp.region = sorted_sites(S, region, "region_split");
  const long n = S.size();
  auto in_A = membership(n, sp.region);
  for (long x = 0; x < n; ++x)
    for (long y = 0; y < n; ++y)
      if (in_A[x] != in_A[y] && lattice::torus_distance(S, x, y) == 1) {
        sp.surface.push_back(x);
        break;
      }
  for (long x = 0; x < n; ++x) {
    bool far = dist_to(S, x, sp.surface) >= ell;
    if (far && in_A[x])
      sp.interior.push_back(x);
    else if (far)
      sp.exterior.push_back(x);
    else
      sp.collar.push_back(x);
  }
  sp.interior_empty = sp.interior.empty();
  sp.exterior_empty = sp.exterior.empty();
  return sp;
}

std::vector<long> collar_sites(const lattice::SiteSet& S, const RegionSplit& split,
                               long radius) {
  std::vector<long> out;
  for (long x = 0; x < S.size(); ++x)
    if (dist_to(S, x, split.surface) < radius) out.push_back(x);
  return out;
}

std::vector<int> classify_terms(const RegionSplit& split,
                                const std::vector<quantum::LocalOperator>& terms) {
  long n = split.interior.size() + split.collar.size() + split.exterior.size();
  auto in_I = membership(n, split.interior);
  auto in_E = membership(n, split.exterior);
  std::vector<int> cls;
  cls.reserve(terms.size());
  for (const auto& T : terms) {
    bool hit_I = false, hit_E = false;
    for (long s : T.support) {
      require(s >= 0 && s < n, "classify_terms: term support outside the site set");
      hit_I = hit_I || in_I[s];
      hit_E = hit_E || in_E[s];
    }
    if (hit_I && hit_E)
      throw domain_error(
          "classify_terms: a term meets both interior and exterior; the collar "
          "is too thin for the interaction range");
    cls.push_back(hit_I ? 0 : (hit_E ? 2 : 1));
  }
  return cls;
}

SmoothedDecomposition smoothed_terms(const quantum::SpectralModel& M,
                                     const lattice::SiteSet& S,
                                     const RegionSplit& split, double a, double v) {
  require(M.dense, "smoothed_terms: dense spectral data required");
  require(a > 0.0 && v > 0.0,
          "smoothed_terms: positive certificate constants required");
  require(!split.surface.empty(),
          "smoothed_terms: the region must be a proper nonempty subset");
  require(M.degeneracy(1e-8) == 1, "smoothed_terms: unique ground state required");

  SmoothedDecomposition D;
  D.ell = split.ell;
  D.a = a;
  D.v = v;
  D.alpha = a * v * v / (2.0 * split.ell);

  const auto cls = classify_terms(split, M.terms);
  const long n = S.size();
  const auto& A = split.region;
  std::vector<long> rest, B2 = collar_sites(S, split, 2 * split.ell);
  auto in_A = membership(n, A);
  for (long x = 0; x < n; ++x)
    if (!in_A[x]) rest.push_back(x);
  require(!rest.empty(), "smoothed_terms: empty complement");
  auto in_rest = membership(n, rest);
  auto in_B2 = membership(n, B2);

  const VectorXcd psi0 = M.evecs.col(0);
  const double E0 = M.evals(0);

  std::array<double, 3> c{};
  std::array<std::vector<size_t>, 3> operand;
  std::vector<size_t> genA, genR, genB;
  for (size_t k = 0; k < M.terms.size(); ++k) {
    const auto& T = M.terms[k];
    VectorXcd y = VectorXcd::Zero(M.dim);
    quantum::apply_embedded(T.mat, M.plans[k], psi0, y);
    c[cls[k]] += std::real(psi0.dot(y));
    operand[cls[k]].push_back(k);
    if (subset_of(T.support, in_A)) genA.push_back(k);
    if (subset_of(T.support, in_rest)) genR.push_back(k);
    if (subset_of(T.support, in_B2)) genB.push_back(k);
  }
  require(std::abs(c[0] + c[1] + c[2] - E0) <= 1e-8 * std::max(1.0, std::abs(E0)),
          "smoothed_terms: term partition does not recover the ground energy");
  for (size_t k : operand[0])
    require(subset_of(M.terms[k].support, in_A),
            "smoothed_terms: an interior term leaves the region");
  for (size_t k : operand[2])
    require(subset_of(M.terms[k].support, in_rest),
            "smoothed_terms: an exterior term leaves the complement");
  for (size_t k : operand[1])
    require(subset_of(M.terms[k].support, in_B2),
            "smoothed_terms: a collar term leaves the doubled collar");

  auto smooth_class = [&](const std::vector<long>& R, const std::vector<size_t>& gen,
                          int which) -> quantum::LocalOperator {
    auto dims_R = region_dims(M, R);
    const MatrixXcd G = assemble_on(M, R, dims_R, gen);
    const MatrixXcd O = assemble_on(M, R, dims_R, operand[which]);
    auto eg = sym_eig(G);
    MatrixXcd K = quantum::gaussian_smooth(eg.evals, eg.evecs, O, D.alpha);
    K -= c[which] * MatrixXcd::Identity(K.rows(), K.cols());
    K = 0.5 * (K + K.adjoint().eval());
    return quantum::local_op(R, dims_R, std::move(K));
  };
  D.K_A = smooth_class(A, genA, 0);
  D.K_B = smooth_class(B2, genB, 1);
  D.K_rest = smooth_class(rest, genR, 2);

  D.residual_gs(0) = apply_on(M, D.K_A, psi0).norm();
  D.residual_gs(1) = apply_on(M, D.K_B, psi0).norm();
  D.residual_gs(2) = apply_on(M, D.K_rest, psi0).norm();
  D.epsilon_emp = D.residual_gs.maxCoeff();

  MatrixXcd Delta = M.H - E0 * MatrixXcd::Identity(M.dim, M.dim);
  Delta -= embed_full(M, D.K_A);
  Delta -= embed_full(M, D.K_B);
  Delta -= embed_full(M, D.K_rest);
  D.residual_sum = quantum::hermitian_norm(
      [&](const VectorXcd& x, VectorXcd& y) { y.noalias() = Delta * x; }, M.dim);
  return D;
}

LowEnergyProjectors low_energy_projectors(const quantum::SpectralModel& M,
                                          const SmoothedDecomposition& D,
                                          double threshold) {
  require(threshold > 0.0, "low_energy_projectors: positive threshold required");
  LowEnergyProjectors P;
  P.threshold = threshold;

  auto project = [&](const quantum::LocalOperator& K, MatrixXcd& out, long& rank,
                     double& commute) {
    auto eg = sym_eig(K.mat);
    long keep = 0;
    while (keep < eg.evals.size() && eg.evals(keep) <= threshold) ++keep;
    if (keep == 0) {
      std::ostringstream os;
      os << "low_energy_projectors: empty low-energy space at threshold "
         << threshold << "; spectrum starts at";
      for (long i = 0; i < std::min<long>(6, eg.evals.size()); ++i)
        os << ' ' << eg.evals(i);
      throw domain_error(os.str());
    }
    out = eg.evecs.leftCols(keep) * eg.evecs.leftCols(keep).adjoint();
    rank = keep;
    commute = quantum::op_norm(out * K.mat - K.mat * out);
  };
  project(D.K_A, P.P_A, P.rank_A, P.commute_A);
  project(D.K_rest, P.P_rest, P.rank_rest, P.commute_rest);

  const VectorXcd psi0 = M.evecs.col(0);
  auto plan_A = quantum::embed_plan(M.dims, D.K_A.support);
  auto plan_rest = quantum::embed_plan(M.dims, D.K_rest.support);

  VectorXcd yA = VectorXcd::Zero(M.dim), yAB = VectorXcd::Zero(M.dim);
  quantum::apply_embedded(P.P_A, plan_A, psi0, yA);
  quantum::apply_embedded(P.P_rest, plan_rest, yA, yAB);
  P.miss_A = (psi0 - yA).norm();
  VectorXcd yR = VectorXcd::Zero(M.dim);
  quantum::apply_embedded(P.P_rest, plan_rest, psi0, yR);
  P.miss_rest = (psi0 - yR).norm();
  P.markov_A = D.residual_gs(0) / threshold;
  P.markov_rest = D.residual_gs(2) / threshold;
  require(P.miss_A <= P.markov_A + 1e-10 && P.miss_rest <= P.markov_rest + 1e-10,
          "low_energy_projectors: Markov estimate violated");

  P.step2 = (psi0 - yAB).norm();
  require(P.step2 <= P.miss_A + P.miss_rest + 1e-10,
          "low_energy_projectors: product defect exceeds its triangle budget");
  P.step2_bound = 2.0 * std::sqrt(D.epsilon_emp);
  return P;
}

GroundFilter p_alpha(const quantum::SpectralModel& M, double alpha, double deg_tol) {
  require(M.dense, "p_alpha: dense spectral data required");
  require(alpha > 0.0, "p_alpha: positive alpha required");
  const long deg = M.degeneracy(deg_tol);
  const double gap = M.gap(deg_tol);

  GroundFilter F;
  F.alpha = alpha;
  F.bound = std::exp(-gap * gap / (4.0 * alpha));
  Eigen::VectorXd damp(M.dim);
  for (long i = 0; i < M.dim; ++i) {
    double dE = M.evals(i) - M.evals(0);
    damp(i) = std::exp(-dE * dE / (4.0 * alpha));
    F.deviation = std::max(F.deviation, std::abs(damp(i) - (i < deg ? 1.0 : 0.0)));
  }
  double excited = damp.tail(M.dim - deg).maxCoeff();
  require(excited <= F.bound * (1.0 + 1e-12) + 1e-15,
          "p_alpha: excited damping exceeded the gap bound");
  F.op = quantum::local_op(M.sites, M.dims,
                           M.evecs * damp.asDiagonal() * M.evecs.adjoint());
  return F;
}

BoundaryOperator boundary_operator(const quantum::SpectralModel& M,
                                   const lattice::SiteSet& S,
                                   const RegionSplit& split,
                                   const SmoothedDecomposition& D,
                                   const LowEnergyProjectors& P,
                                   const QuadraturePlan& quad) {
  require(M.dense, "boundary_operator: dense path required");
  require(quad.first >= 2 && quad.cap >= 2 * quad.first,
          "boundary_operator: malformed node plan");

  const MatrixXcd EA = embed_full(M, D.K_A);
  const MatrixXcd EB = embed_full(M, D.K_B);
  const MatrixXcd ER = embed_full(M, D.K_rest);
  auto eg1 = sym_eig(EA + EB + ER);
  auto eg2 = sym_eig(EA + ER);
  const MatrixXcd mix = eg1.evecs.adjoint() * eg2.evecs;
  const double sa = std::sqrt(D.alpha);
  const long dim = M.dim;

  auto accumulate = [&](long nodes) {
    Eigen::VectorXd x, w;
    quadrature::gauss_hermite(static_cast<int>(nodes), x, w);
    MatrixXcd sum = MatrixXcd::Zero(dim, dim);
    VectorXcd ph1(dim), ph2(dim);
    for (long k = 0; k < nodes; ++k) {
      const double t = x(k) / sa;
      for (long i = 0; i < dim; ++i) ph1(i) = std::polar(1.0, t * eg1.evals(i));
      const double wk = w(k) / std::sqrt(pi);
      for (long j = 0; j < dim; ++j) ph2(j) = std::polar(wk, -t * eg2.evals(j));
      sum.noalias() += ph1.asDiagonal() * mix * ph2.asDiagonal();
    }
    return sum;
  };

  BoundaryOperator B;
  long nodes = quad.first;
  MatrixXcd core = accumulate(nodes);
  while (true) {
    if (2 * nodes > quad.cap)
      throw resource_error(
          "boundary_operator: time-average quadrature did not settle within "
          "the node budget");
    MatrixXcd next = accumulate(2 * nodes);
    nodes *= 2;
    B.quad_change = (next - core).norm();
    core.swap(next);
    if (B.quad_change < quad.tol) break;
  }
  B.nodes = nodes;

  const MatrixXcd tilde = eg1.evecs * core * eg2.evecs.adjoint();
  std::vector<long> B3 = collar_sites(S, split, 3 * split.ell);
  require(!B3.empty(), "boundary_operator: empty collar");
  auto dims_B3 = region_dims(M, B3);
  long dim_B3 = 1;
  for (int d : dims_B3) dim_B3 *= d;
  MatrixXcd PBmat =
      quantum::partial_trace(tilde, M.dims, B3) / double(M.dim / dim_B3);
  B.norm = quantum::op_norm(PBmat);
  B.idempotency_defect = quantum::op_norm(PBmat * PBmat - PBmat);
  B.P_B = quantum::local_op(B3, dims_B3, std::move(PBmat));

  const VectorXcd psi0 = M.evecs.col(0);
  MatrixXcd approx = embed_full(M, B.P_B);
  approx = approx * quantum::embed(P.P_A, quantum::embed_plan(M.dims, D.K_A.support));
  approx =
      approx * quantum::embed(P.P_rest, quantum::embed_plan(M.dims, D.K_rest.support));
  approx.noalias() -= psi0 * psi0.adjoint();
  B.final_residual = quantum::op_norm(approx);
  return B;
}

std::vector<PipelineStage> run_pipeline(const quantum::SpectralModel& M,
                                        const lattice::SiteSet& S,
                                        std::span<const long> region,
                                        std::span<const long> ells,
                                        const PipelineOptions& opts) {
  require(!ells.empty(), "run_pipeline: no collar radii given");
  std::vector<PipelineStage> out;
  out.reserve(ells.size());
  for (long ell : ells) {
    PipelineStage st;
    st.split = region_split(S, region, ell);
    st.smooth = smoothed_terms(M, S, st.split, opts.a, opts.v);
    double threshold =
        std::max(std::sqrt(st.smooth.epsilon_emp), opts.threshold_floor);
    st.projectors = low_energy_projectors(M, st.smooth, threshold);
    st.filter = p_alpha(M, st.smooth.alpha, opts.deg_tol);
    st.boundary =
        boundary_operator(M, S, st.split, st.smooth, st.projectors, opts.quadrature);
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace lrlab::gapped
