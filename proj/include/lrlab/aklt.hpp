#pragma once

#include <vector>

#include "lrlab/spectral.hpp"

namespace lrlab::aklt {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Nearest-neighbour bond of the spin-1 AKLT chain: the projector onto the
// joint spin-2 subspace, written as 1/3 + (S.S)/2 + (S.S)^2/6 on C^3 (x) C^3.
MatrixXcd aklt_bond();

// Bond terms of the open (or periodic) chain on sites 0..n-1.
std::vector<quantum::LocalOperator> aklt_chain(long n, bool periodic,
                                               const MatrixXcd& bond = aklt_bond());

// Valence-bond intertwiners. W embeds the spin-1 space into the triplet
// sector of two spin-1/2 sites (basis m = 1, 0, -1, Condon-Shortley phases);
// V attaches one site to a boundary qubit through a singlet, scaled by c so
// that the transfer map is unital.
struct Intertwiners {
  MatrixXcd W;    // 4 x 3 isometry
  MatrixXcd V;    // 6 x 2 isometry, V = c (W* (x) 1)(. (x) singlet)
  double c = 0.0;
};

Intertwiners intertwiners();
Intertwiners intertwiners(const MatrixXcd& W);  // any 4 x 3 intertwiner

// Completely positive transfer action B -> V* (A (x) B) V on 2 x 2 matrices,
// stored as a 4 x 4 matrix against the row-major basis of matrix units.
struct TransferMap {
  Eigen::Matrix4cd mat;
  MatrixXcd apply(const MatrixXcd& B) const;
  Eigen::Vector4cd eigenvalues() const;  // sorted by descending real part
};

TransferMap transfer_map(const MatrixXcd& A);
TransferMap transfer_map(const Intertwiners& iw, const MatrixXcd& A);

// Expectation of A_1 (x) ... (x) A_n in the translation-invariant chain
// state: (1/2) Tr [E_{A_1} o ... o E_{A_n}] (1).
cd fcs_expectation(const std::vector<MatrixXcd>& As);

// Expectation on the open n-site chain with boundary weights Pa, Pb (2 x 2,
// positive), normalised against the identity string of the same length.
cd finite_fcs(const MatrixXcd& Pa, const MatrixXcd& Pb,
              const std::vector<MatrixXcd>& As);

// <S^a_0 S^b_r> in the infinite-chain state, via r - 1 identity spacers.
double correlation(int a, int b, long r);

// Reduced state of a length-ell interval, carried on the 4-dimensional
// boundary space and built from powers of the unital transfer map.
MatrixXcd reduced_density(long ell);
double interval_entropy(long ell);  // von Neumann, natural log

// Raw valence-bond ground states psi_{alpha beta} of the open n-site chain,
// columns ordered (0,0), (0,1), (1,0), (1,1); kernel_basis orthonormalises.
MatrixXcd aklt_vectors(long n);
MatrixXcd kernel_basis(long n);

struct GapResult {
  double e0 = 0.0;
  double gap = 0.0;
  long degeneracy = 0;
  Eigen::VectorXd evals;
  Eigen::VectorXd residuals;
};

// Lowest spectrum of the n-site chain (3^n <= 531441). Dense below 3^6,
// deflated Lanczos above; non-convergence surfaces as a resource error.
GapResult aklt_gap(long n, bool periodic, int lowest_k = 0);

struct FactorizationOptions {
  MatrixXcd bond;          // defaults to aklt_bond()
  double deg_tol = 1e-6;   // ground-cluster resolution
  quantum::AssembleOptions assemble{729, 5, 1e-10, 800, 20240901u};
};

// || G_[a-l, a+l+1] (G_[1,a] (x) G_[a+1,L]) - G_[1,L] || on the L-site
// chain, all projectors onto ground spaces of sub-chain Hamiltonians;
// sites are labelled 1..L and the cut sits between a and a+1. The sweep
// form shares the chain and half-chain ground spaces across windows.
double factorization_residual(long L, long a, long ell,
                              const FactorizationOptions& opts = {});
std::vector<double> factorization_sweep(long L, long a, const std::vector<long>& ells,
                                        const FactorizationOptions& opts = {});

}  // namespace lrlab::aklt
