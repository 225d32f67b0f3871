#include "lrlab/operators.hpp"

#include <algorithm>
#include <cmath>

namespace lrlab::quantum {

long LocalOperator::dimension() const {
  long d = 1;
  for (int k : dims) d *= k;
  return d;
}

void LocalOperator::validate() const {
  require(support.size() == dims.size(), "LocalOperator: support/dims size mismatch");
  require(!support.empty(), "LocalOperator: empty support");
  for (size_t i = 1; i < support.size(); ++i)
    require(support[i - 1] < support[i], "LocalOperator: support must be strictly increasing");
  for (int k : dims) require(k >= 1, "LocalOperator: local dimension must be >= 1");
  require(mat.rows() == mat.cols() && mat.rows() == dimension(),
          "LocalOperator: matrix shape does not match dims");
}

LocalOperator local_op(std::vector<long> support, std::vector<int> dims, MatrixXcd mat) {
  LocalOperator A{std::move(support), std::move(dims), std::move(mat)};
  A.validate();
  return A;
}

MatrixXcd pauli(int k) {
  MatrixXcd m(2, 2);
  const cd i(0.0, 1.0);
  switch (k) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -i, i, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw domain_error("pauli: k must be 0..3");
  }
  return m;
}

MatrixXcd spin_matrix(int twoS, int k) {
  require(twoS >= 1, "spin_matrix: need 2s >= 1");
  const int n = twoS + 1;
  const double s = twoS / 2.0;
  MatrixXcd m = MatrixXcd::Zero(n, n);
  if (k == 0) return MatrixXcd::Identity(n, n);
  // raising operator in the m = s..-s basis
  MatrixXcd Sp = MatrixXcd::Zero(n, n);
  for (int r = 0; r < n - 1; ++r) {
    double mm = s - 1 - r;  // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>
    Sp(r, r + 1) = std::sqrt(s * (s + 1) - mm * (mm + 1));
  }
  const cd i(0.0, 1.0);
  switch (k) {
    case 1: m = 0.5 * (Sp + Sp.adjoint()); break;
    case 2: m = -0.5 * i * (Sp - Sp.adjoint()); break;
    case 3:
      for (int r = 0; r < n; ++r) m(r, r) = s - r;
      break;
    default: throw domain_error("spin_matrix: k must be 0..3");
  }
  return m;
}

MatrixXcd kron(const MatrixXcd& A, const MatrixXcd& B) {
  MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (long i = 0; i < A.rows(); ++i)
    for (long j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

EmbedPlan embed_plan(const std::vector<int>& region_dims,
                     const std::vector<long>& positions) {
  const long n = static_cast<long>(region_dims.size());
  for (size_t i = 0; i < positions.size(); ++i) {
    require(positions[i] >= 0 && positions[i] < n, "embed_plan: position out of range");
    if (i) require(positions[i - 1] < positions[i], "embed_plan: positions must increase");
  }
  std::vector<long> stride(n);
  long acc = 1;
  for (long p = n - 1; p >= 0; --p) {
    stride[p] = acc;
    acc *= region_dims[p];
  }
  EmbedPlan plan;
  plan.region_dim = acc;

  std::vector<long> comp;
  {
    size_t k = 0;
    for (long p = 0; p < n; ++p) {
      if (k < positions.size() && positions[k] == p) { ++k; continue; }
      comp.push_back(p);
    }
  }
  auto offsets = [&](const std::vector<long>& pos) {
    std::vector<long> off{0};
    for (long p : pos) {
      std::vector<long> next;
      next.reserve(off.size() * region_dims[p]);
      for (long base : off)
        for (int c = 0; c < region_dims[p]; ++c) next.push_back(base + c * stride[p]);
      off = std::move(next);
    }
    return off;
  };
  plan.sup_off = offsets(positions);
  plan.comp_off = offsets(comp);
  plan.sup_dim = static_cast<long>(plan.sup_off.size());
  return plan;
}

MatrixXcd embed(const MatrixXcd& A, const EmbedPlan& plan) {
  require(A.rows() == plan.sup_dim && A.cols() == plan.sup_dim,
          "embed: operator dimension does not match plan");
  MatrixXcd E = MatrixXcd::Zero(plan.region_dim, plan.region_dim);
  for (long b : plan.comp_off)
    for (long a = 0; a < plan.sup_dim; ++a)
      for (long ap = 0; ap < plan.sup_dim; ++ap)
        E(plan.sup_off[a] + b, plan.sup_off[ap] + b) = A(a, ap);
  return E;
}

MatrixXcd embed(const LocalOperator& A, const std::vector<long>& region_sites,
                const std::vector<int>& region_dims) {
  A.validate();
  require(region_sites.size() == region_dims.size(), "embed: region shape mismatch");
  std::vector<long> positions;
  positions.reserve(A.support.size());
  for (size_t i = 0; i < A.support.size(); ++i) {
    auto it = std::find(region_sites.begin(), region_sites.end(), A.support[i]);
    require(it != region_sites.end(), "embed: support site not in region");
    long p = it - region_sites.begin();
    require(region_dims[p] == A.dims[i], "embed: local dimension mismatch");
    positions.push_back(p);
  }
  return embed(A.mat, embed_plan(region_dims, positions));
}

void apply_embedded(const MatrixXcd& A, const EmbedPlan& plan,
                    const VectorXcd& x, VectorXcd& y) {
  require(x.size() == plan.region_dim && y.size() == plan.region_dim,
          "apply_embedded: vector dimension mismatch");
  VectorXcd slice(plan.sup_dim), out(plan.sup_dim);
  for (long b : plan.comp_off) {
    for (long a = 0; a < plan.sup_dim; ++a) slice[a] = x[plan.sup_off[a] + b];
    out.noalias() = A * slice;
    for (long a = 0; a < plan.sup_dim; ++a) y[plan.sup_off[a] + b] += out[a];
  }
}

MatrixXcd partial_trace(const MatrixXcd& M, const std::vector<int>& dims,
                        const std::vector<long>& keep) {
  long total = 1;
  for (int d : dims) total *= d;
  require(M.rows() == total && M.cols() == total, "partial_trace: shape mismatch");
  auto plan = embed_plan(dims, keep);
  const long nk = plan.sup_dim;
  MatrixXcd R = MatrixXcd::Zero(nk, nk);
  for (long a = 0; a < nk; ++a)
    for (long ap = 0; ap < nk; ++ap) {
      cd s = 0.0;
      for (long b : plan.comp_off) s += M(plan.sup_off[a] + b, plan.sup_off[ap] + b);
      R(a, ap) = s;
    }
  return R;
}

double op_norm(const MatrixXcd& M) {
  require(M.rows() == M.cols(), "op_norm: square matrix expected");
  const long n = M.rows();
  if (n <= 512) return M.jacobiSvd().singularValues()(0);
  // power iteration on M^dag M with a deterministic start
  VectorXcd v(n);
  for (long i = 0; i < n; ++i) v[i] = cd(1.0 + 1e-3 * std::cos(0.7 * double(i)), 1e-3 * std::sin(1.3 * double(i)));
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < 10000; ++it) {
    VectorXcd w = M * v;
    double nl = w.norm();
    v = M.adjoint() * w;
    double nv = v.norm();
    if (nv == 0.0) return 0.0;
    v /= nv;
    if (std::abs(nl - lam) <= 1e-10 * std::max(1.0, nl)) return nl;
    lam = nl;
  }
  throw resource_error("op_norm: power iteration cap exhausted");
}

LocalOperator product(const LocalOperator& A, const LocalOperator& B) {
  A.validate();
  B.validate();
  std::vector<long> sites;
  std::vector<int> dims;
  {
    size_t i = 0, j = 0;
    while (i < A.support.size() || j < B.support.size()) {
      if (j == B.support.size() ||
          (i < A.support.size() && A.support[i] < B.support[j])) {
        sites.push_back(A.support[i]);
        dims.push_back(A.dims[i]);
        ++i;
      } else if (i == A.support.size() || B.support[j] < A.support[i]) {
        sites.push_back(B.support[j]);
        dims.push_back(B.dims[j]);
        ++j;
      } else {
        require(A.dims[i] == B.dims[j], "product: local dimension mismatch");
        sites.push_back(A.support[i]);
        dims.push_back(A.dims[i]);
        ++i;
        ++j;
      }
    }
  }
  MatrixXcd EA = embed(A, sites, dims), EB = embed(B, sites, dims);
  return local_op(sites, dims, EA * EB);
}

double commutator_norm(const LocalOperator& A, const LocalOperator& B) {
  LocalOperator AB = product(A, B), BA = product(B, A);
  return op_norm(AB.mat - BA.mat);
}

}  // namespace lrlab::quantum
