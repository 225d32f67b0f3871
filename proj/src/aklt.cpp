#include "lrlab/aklt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "lrlab/lattice.hpp"

namespace lrlab::aklt {

namespace {

long pow3(long n) {
  long d = 1;
  while (n-- > 0) d *= 3;
  return d;
}

const Intertwiners& default_iw() {
  static const Intertwiners iw = intertwiners();
  return iw;
}

MatrixXcd apply_transfer(const Intertwiners& iw, const MatrixXcd& A, const MatrixXcd& B) {
  return iw.V.adjoint() * quantum::kron(A, B) * iw.V;
}

MatrixXcd exchange_conjugate(const MatrixXcd& bond) {
  MatrixXcd out(9, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) out(3 * j + i, 3 * l + k) = bond(3 * i + j, 3 * k + l);
  return out;
}

}  // namespace

MatrixXcd aklt_bond() {
  MatrixXcd SS = MatrixXcd::Zero(9, 9);
  for (int k = 1; k <= 3; ++k) {
    MatrixXcd Sk = quantum::spin_matrix(2, k);
    SS += quantum::kron(Sk, Sk);
  }
  return (1.0 / 3.0) * MatrixXcd::Identity(9, 9) + 0.5 * SS + (1.0 / 6.0) * SS * SS;
}

std::vector<quantum::LocalOperator> aklt_chain(long n, bool periodic, const MatrixXcd& bond) {
  require(n >= 2, "aklt_chain: at least two sites expected");
  require(bond.rows() == 9 && bond.cols() == 9, "aklt_chain: bond must act on two spin-1 sites");
  std::vector<quantum::LocalOperator> terms;
  for (long x = 0; x + 1 < n; ++x)
    terms.push_back(quantum::local_op({x, x + 1}, {3, 3}, bond));
  if (periodic) {
    require(n >= 3, "aklt_chain: periodic wrap needs at least three sites");
    double scale = std::max(1.0, bond.cwiseAbs().maxCoeff());
    require((exchange_conjugate(bond) - bond).cwiseAbs().maxCoeff() <= 1e-12 * scale,
            "aklt_chain: periodic wrap needs an exchange-symmetric bond");
    terms.push_back(quantum::local_op({0, n - 1}, {3, 3}, bond));
  }
  return terms;
}

Intertwiners intertwiners() {
  MatrixXcd W = MatrixXcd::Zero(4, 3);
  const double s = 1.0 / std::sqrt(2.0);
  W(0, 0) = 1.0;
  W(1, 1) = s;
  W(2, 1) = s;
  W(3, 2) = 1.0;
  return intertwiners(W);
}

Intertwiners intertwiners(const MatrixXcd& W) {
  require(W.rows() == 4 && W.cols() == 3, "intertwiners: W must map C^3 into C^2 (x) C^2");
  require((W.adjoint() * W - MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12,
          "intertwiners: W must be an isometry");
  VectorXcd phi = VectorXcd::Zero(4);
  const double s = 1.0 / std::sqrt(2.0);
  phi(1) = s;
  phi(2) = -s;
  MatrixXcd lift = quantum::kron(W.adjoint(), MatrixXcd::Identity(2, 2));
  MatrixXcd V0(6, 2);
  for (int alpha = 0; alpha < 2; ++alpha) {
    VectorXcd in = VectorXcd::Zero(8);
    for (int j = 0; j < 4; ++j) in(4 * alpha + j) = phi(j);
    V0.col(alpha) = lift * in;
  }
  MatrixXcd G = V0.adjoint() * V0;
  double m = 0.5 * std::real(G.trace());
  require(m > 1e-12, "intertwiners: boundary map is degenerate");
  require((G - m * MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12,
          "intertwiners: W does not intertwine the valence-bond construction");
  Intertwiners iw;
  iw.W = W;
  iw.c = 1.0 / std::sqrt(m);
  iw.V = iw.c * V0;
  return iw;
}

MatrixXcd TransferMap::apply(const MatrixXcd& B) const {
  require(B.rows() == 2 && B.cols() == 2, "TransferMap: argument must be 2 x 2");
  Eigen::Vector4cd v(B(0, 0), B(0, 1), B(1, 0), B(1, 1));
  Eigen::Vector4cd w = mat * v;
  MatrixXcd out(2, 2);
  out << w(0), w(1), w(2), w(3);
  return out;
}

Eigen::Vector4cd TransferMap::eigenvalues() const {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(mat, false);
  require(es.info() == Eigen::Success, "TransferMap: eigensolver failed");
  std::array<cd, 4> ev;
  for (int i = 0; i < 4; ++i) ev[i] = es.eigenvalues()(i);
  std::sort(ev.begin(), ev.end(), [](cd x, cd y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  Eigen::Vector4cd out;
  for (int i = 0; i < 4; ++i) out(i) = ev[i];
  return out;
}

TransferMap transfer_map(const Intertwiners& iw, const MatrixXcd& A) {
  require(A.rows() == 3 && A.cols() == 3, "transfer_map: observable must be 3 x 3");
  TransferMap T;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      MatrixXcd B = MatrixXcd::Zero(2, 2);
      B(k, l) = 1.0;
      MatrixXcd EB = apply_transfer(iw, A, B);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) T.mat(2 * i + j, 2 * k + l) = EB(i, j);
    }
  return T;
}

TransferMap transfer_map(const MatrixXcd& A) { return transfer_map(default_iw(), A); }

cd fcs_expectation(const std::vector<MatrixXcd>& As) {
  const Intertwiners& iw = default_iw();
  MatrixXcd B = MatrixXcd::Identity(2, 2);
  for (auto it = As.rbegin(); it != As.rend(); ++it) {
    require(it->rows() == 3 && it->cols() == 3, "fcs_expectation: observables must be 3 x 3");
    B = apply_transfer(iw, *it, B);
  }
  return 0.5 * B.trace();
}

cd finite_fcs(const MatrixXcd& Pa, const MatrixXcd& Pb, const std::vector<MatrixXcd>& As) {
  require(Pa.rows() == 2 && Pa.cols() == 2 && Pb.rows() == 2 && Pb.cols() == 2,
          "finite_fcs: boundary weights must be 2 x 2");
  require(!As.empty(), "finite_fcs: at least one site expected");
  const Intertwiners& iw = default_iw();
  const MatrixXcd id3 = MatrixXcd::Identity(3, 3);
  // The transfer map closes each step through a singlet, so the right
  // boundary weight enters spin-flipped.
  MatrixXcd eps = MatrixXcd::Zero(2, 2);
  eps(0, 1) = 1.0;
  eps(1, 0) = -1.0;
  MatrixXcd B = eps * Pb.transpose() * eps.adjoint();
  MatrixXcd Bid = B;
  for (auto it = As.rbegin(); it != As.rend(); ++it) {
    require(it->rows() == 3 && it->cols() == 3, "finite_fcs: observables must be 3 x 3");
    B = apply_transfer(iw, *it, B);
    Bid = apply_transfer(iw, id3, Bid);
  }
  cd num = (Pa * B).trace();
  cd den = (Pa * Bid).trace();
  require(std::abs(den) > 1e-15, "finite_fcs: boundary weights annihilate the chain");
  return num / den;
}

double correlation(int a, int b, long r) {
  require(1 <= a && a <= 3 && 1 <= b && b <= 3, "correlation: spin components are 1..3");
  require(r >= 1, "correlation: separation must be positive");
  std::vector<MatrixXcd> As;
  As.reserve(static_cast<size_t>(r) + 1);
  As.push_back(quantum::spin_matrix(2, a));
  for (long k = 1; k < r; ++k) As.push_back(MatrixXcd::Identity(3, 3));
  As.push_back(quantum::spin_matrix(2, b));
  return std::real(fcs_expectation(As));
}

MatrixXcd reduced_density(long ell) {
  require(ell >= 1, "reduced_density: interval length must be positive");
  TransferMap E1 = transfer_map(MatrixXcd::Identity(3, 3));
  MatrixXcd rho(4, 4);
  for (int o = 0; o < 2; ++o)
    for (int op = 0; op < 2; ++op) {
      MatrixXcd B = MatrixXcd::Zero(2, 2);
      B(o, op) = 1.0;
      for (long k = 0; k < ell; ++k) B = E1.apply(B);
      for (int i = 0; i < 2; ++i)
        for (int ip = 0; ip < 2; ++ip) rho(2 * i + o, 2 * ip + op) = 0.5 * B(i, ip);
    }
  return 0.5 * (rho + rho.adjoint()).eval();
}

double interval_entropy(long ell) {
  MatrixXcd rho = reduced_density(ell);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
  require(es.info() == Eigen::Success, "interval_entropy: eigensolver failed");
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double lam = es.eigenvalues()(i);
    if (lam > 0.0) s -= lam * std::log(lam);
  }
  return s;
}

MatrixXcd aklt_vectors(long n) {
  require(2 <= n && n <= 14, "aklt_vectors: chain length out of range");
  const Intertwiners& iw = default_iw();
  const MatrixXcd Wd = iw.W.adjoint();
  MatrixXcd out(pow3(n), 4);
  int col = 0;
  for (int alpha = 0; alpha < 2; ++alpha)
    for (int beta = 0; beta < 2; ++beta, ++col) {
      MatrixXcd M = MatrixXcd::Zero(1, 2);
      M(0, alpha) = 1.0;
      long rows = 1;
      for (long k = 0; k + 1 < n; ++k) {
        MatrixXcd next(rows * 3, 2);
        for (int a = 0; a < 3; ++a) {
          Eigen::Matrix2cd Va;
          for (int c = 0; c < 2; ++c)
            for (int b = 0; b < 2; ++b) Va(c, b) = iw.V(2 * a + c, b);
          next(Eigen::seqN(a, rows, 3), Eigen::all) = M * Va.transpose();
        }
        M = std::move(next);
        rows *= 3;
      }
      VectorXcd psi(rows * 3);
      for (int s = 0; s < 3; ++s)
        psi(Eigen::seqN(s, rows, 3)) = M.col(0) * Wd(s, beta) + M.col(1) * Wd(s, 2 + beta);
      out.col(col) = psi;
    }
  return out;
}

MatrixXcd kernel_basis(long n) {
  MatrixXcd Psi = aklt_vectors(n);
  Eigen::HouseholderQR<MatrixXcd> qr(Psi);
  return qr.householderQ() * MatrixXcd::Identity(Psi.rows(), 4);
}

GapResult aklt_gap(long n, bool periodic, int lowest_k) {
  require(2 <= n && n <= 12, "aklt_gap: chain dimension exceeds the sparse budget");
  auto S = lattice::path(n);
  std::vector<int> dims(static_cast<size_t>(n), 3);
  quantum::AssembleOptions ao;
  ao.dense_cap = 729;
  ao.lowest_k = lowest_k > 0 ? lowest_k : (periodic ? 3 : 6);
  ao.tol = 1e-10;
  ao.max_iter = 800;
  auto M = quantum::assemble(S, dims, aklt_chain(n, periodic), ao);
  GapResult g;
  g.evals = M.evals;
  g.residuals = M.residuals;
  g.e0 = M.evals(0);
  g.degeneracy = M.degeneracy(1e-6);
  g.gap = M.gap(1e-6);
  return g;
}

namespace {

MatrixXcd region_ground_basis(long m, const MatrixXcd& bond, const FactorizationOptions& opts) {
  auto S = lattice::path(m);
  std::vector<int> dims(static_cast<size_t>(m), 3);
  auto M = quantum::assemble(S, dims, aklt_chain(m, false, bond), opts.assemble);
  return quantum::ground_space(M, opts.deg_tol).basis;
}

}  // namespace

std::vector<double> factorization_sweep(long L, long a, const std::vector<long>& ells,
                                        const FactorizationOptions& opts) {
  require(2 <= L && L <= 12, "factorization_residual: chain dimension exceeds the budget");
  require(!ells.empty(), "factorization_residual: at least one window expected");
  for (long ell : ells) {
    require(ell >= 1, "factorization_residual: window half-width must be positive");
    require(1 <= a - ell && a + ell + 1 <= L,
            "factorization_residual: window must fit inside the chain");
  }
  MatrixXcd bond = opts.bond.size() > 0 ? opts.bond : aklt_bond();
  require(bond.rows() == 9 && bond.cols() == 9,
          "factorization_residual: bond must act on two spin-1 sites");

  const long dl = pow3(a);
  const long dr = pow3(L - a);
  const long dim = dl * dr;

  MatrixXcd Ul = region_ground_basis(a, bond, opts);
  MatrixXcd Ur = region_ground_basis(L - a, bond, opts);
  MatrixXcd Uf = region_ground_basis(L, bond, opts);
  MatrixXcd Urc = Ur.conjugate();
  MatrixXcd Urt = Ur.transpose();

  using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  auto split_project = [&](VectorXcd& v) {
    Eigen::Map<RowMat> vm(v.data(), dl, dr);
    MatrixXcd t = Ul.adjoint() * vm;
    vm = Ul * t;
    MatrixXcd u = vm * Urc;
    vm = u * Urt;
  };

  std::vector<double> out;
  out.reserve(ells.size());
  for (long ell : ells) {
    const long w0 = a - ell - 1;
    const long mw = 2 * ell + 2;
    const long pre = pow3(w0);
    const long mid = pow3(mw);
    const long post = pow3(L - w0 - mw);
    MatrixXcd Ub = region_ground_basis(mw, bond, opts);

    auto window_project = [&](VectorXcd& v) {
      for (long p = 0; p < pre; ++p) {
        Eigen::Map<RowMat> Z(v.data() + p * mid * post, mid, post);
        MatrixXcd t = Ub.adjoint() * Z;
        Z = Ub * t;
      }
    };
    auto apply_T = [&](const VectorXcd& x, VectorXcd& y, bool adjoint) {
      VectorXcd w = x;
      if (adjoint) {
        window_project(w);
        split_project(w);
      } else {
        split_project(w);
        window_project(w);
      }
      y.noalias() = w - Uf * (Uf.adjoint() * x);
    };
    quantum::ApplyFn gram = [&](const VectorXcd& x, VectorXcd& y) {
      VectorXcd t(dim);
      apply_T(x, t, false);
      apply_T(t, y, true);
    };
    quantum::LanczosOptions lo;
    lo.tol = 1e-9;
    lo.max_iter = opts.assemble.max_iter;
    double top = quantum::hermitian_norm(gram, dim, lo);
    out.push_back(std::sqrt(std::max(0.0, top)));
  }
  return out;
}

double factorization_residual(long L, long a, long ell, const FactorizationOptions& opts) {
  return factorization_sweep(L, a, {ell}, opts).front();
}

}  // namespace lrlab::aklt
