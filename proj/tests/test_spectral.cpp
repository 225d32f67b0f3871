#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "lrlab/spectral.hpp"

using namespace lrlab;
using namespace lrlab::quantum;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

std::vector<LocalOperator> heisenberg_terms(long n) {
  std::vector<LocalOperator> terms;
  for (long x = 0; x + 1 < n; ++x) {
    MatrixXcd h = MatrixXcd::Zero(4, 4);
    for (int k = 1; k <= 3; ++k) h += kron(spin_matrix(1, k), spin_matrix(1, k));
    terms.push_back(local_op({x, x + 1}, {2, 2}, h));
  }
  return terms;
}

MatrixXcd random_hermitian(long n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  MatrixXcd M(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) M(i, j) = cd(g(rng), g(rng));
  return 0.5 * (M + MatrixXcd(M.adjoint()));
}

}  // namespace

TEST_CASE("dense assemble reproduces the explicit Hamiltonian and spectrum") {
  auto S = lattice::path(2);
  std::vector<LocalOperator> terms;
  MatrixXcd xx = kron(pauli(1), pauli(1)) + kron(pauli(2), pauli(2));
  terms.push_back(local_op({0, 1}, {2, 2}, xx));
  auto M = assemble(S, {2, 2}, terms);
  CHECK(M.dense);
  CHECK((M.H - xx).norm() == doctest::Approx(0.0));
  CHECK(M.ground_energy() == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(M.gap(1e-10) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(M.degeneracy(1e-10) == 1);
}

TEST_CASE("heisenberg_evolve matches the Pade expm oracle") {
  auto S = lattice::path(3);
  auto M = assemble(S, {2, 2, 2}, heisenberg_terms(3));
  auto A = local_op({0}, {2}, pauli(3));
  for (double t : {0.0, 0.3, 1.7, -2.2}) {
    auto evolved = heisenberg_evolve(M, A, t);
    MatrixXcd U = (cd(0, 1) * t * M.H).exp();
    MatrixXcd oracle = U * embed(A, M.sites, M.dims) * U.adjoint();
    CHECK((evolved.mat - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
  // norm preservation and t=0 identity
  auto e0 = heisenberg_evolve(M, A, 0.0);
  CHECK((e0.mat - embed(A, M.sites, M.dims)).norm() == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(op_norm(heisenberg_evolve(M, A, 1.1).mat) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("iterative path agrees with dense eigenvalues and certifies residuals") {
  auto S = lattice::path(7);
  std::vector<int> dims(7, 2);
  auto terms = heisenberg_terms(7);
  auto dense = assemble(S, dims, terms);
  AssembleOptions opts;
  opts.dense_cap = 16;  // force Lanczos
  opts.lowest_k = 6;
  auto sparse = assemble(S, dims, terms, opts);
  CHECK_FALSE(sparse.dense);
  double hnorm = std::max(std::abs(dense.evals(0)), std::abs(dense.evals(dense.dim - 1)));
  for (int i = 0; i < 6; ++i) {
    CHECK(sparse.evals(i) == doctest::Approx(dense.evals(i)).epsilon(1e-9));
    CHECK(sparse.residuals(i) <= 1e-8 * std::max(1.0, hnorm));
  }
}

TEST_CASE("iterative path resolves exact degeneracy") {
  // open Ising chain without field: two product ground states
  auto S = lattice::path(6);
  std::vector<int> dims(6, 2);
  std::vector<LocalOperator> terms;
  for (long x = 0; x + 1 < 6; ++x)
    terms.push_back(local_op({x, x + 1}, {2, 2}, -kron(pauli(3), pauli(3))));
  auto dense = assemble(S, dims, terms);
  AssembleOptions opts;
  opts.dense_cap = 16;
  opts.lowest_k = 5;
  auto sparse = assemble(S, dims, terms, opts);
  CHECK(dense.degeneracy(1e-10) == 2);
  CHECK(sparse.degeneracy(1e-10) == 2);
  CHECK(sparse.gap(1e-8) == doctest::Approx(dense.gap(1e-8)).epsilon(1e-9));
  auto G = ground_space(sparse, 1e-8);
  CHECK(G.degeneracy == 2);
  CHECK((G.basis.adjoint() * G.basis - MatrixXcd::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("gaussian_smooth matches a quadrature oracle and contracts norms") {
  const long n = 6;
  MatrixXcd G = random_hermitian(n, 41), O = random_hermitian(n, 42);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G);
  double alpha = 0.8;
  MatrixXcd sm = gaussian_smooth(es.eigenvalues(), es.eigenvectors(), O, alpha);

  // composite Simpson oracle with Pade exponentials per node
  double T = 9.0 / std::sqrt(alpha);
  int panels = 3000;
  double h = 2 * T / panels;
  MatrixXcd acc = MatrixXcd::Zero(n, n);
  auto f = [&](double t) -> MatrixXcd {
    MatrixXcd U = (cd(0, 1) * t * G).exp();
    return std::exp(-alpha * t * t) * (U * O * U.adjoint());
  };
  for (int p = 0; p < panels; ++p) {
    double a = -T + p * h;
    acc += (h / 6.0) * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
  }
  acc *= std::sqrt(alpha / lrlab::pi);
  CHECK((sm - acc).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((sm - sm.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(op_norm(sm) <= op_norm(O) * (1 + 1e-12));
  // alpha -> infinity returns the operator itself
  MatrixXcd id = gaussian_smooth(es.eigenvalues(), es.eigenvectors(), O, 1e16);
  CHECK((id - O).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("hermitian_norm matches op_norm") {
  MatrixXcd M = random_hermitian(300, 77);
  ApplyFn ap = [&](const VectorXcd& x, VectorXcd& y) { y = M * x; };
  CHECK(hermitian_norm(ap, 300) == doctest::Approx(op_norm(M)).epsilon(1e-8));
}
