#pragma once

#include <functional>

#include "lrlab/lattice.hpp"
#include "lrlab/operators.hpp"

namespace lrlab::quantum {

using ApplyFn = std::function<void(const VectorXcd&, VectorXcd&)>;  // y = A x

struct AssembleOptions {
  long dense_cap = 4096;   // full diagonalisation at or below this dimension
  int lowest_k = 8;        // retained eigenpairs on the iterative path
  double tol = 1e-8;       // residual target, relative to ||H||
  int max_iter = 600;      // Krylov steps per eigenpair
  unsigned seed = 20240901u;
};

// Assembled model: Hamiltonian terms embedded over the ordered sites of a
// SiteSet, with either a full eigendecomposition (dense path) or the lowest-k
// eigenpairs from deflated Lanczos (iterative path).
struct SpectralModel {
  std::vector<long> sites;
  std::vector<int> dims;
  std::vector<LocalOperator> terms;
  std::vector<EmbedPlan> plans;  // one per term
  long dim = 0;
  bool dense = true;
  MatrixXcd H;                // dense path only
  Eigen::VectorXd evals;      // ascending; all of them (dense) or lowest-k
  MatrixXcd evecs;            // columns matching evals
  Eigen::VectorXd residuals;  // ||Hv - Ev|| per retained pair (iterative path)

  double ground_energy() const { return evals(0); }
  long degeneracy(double deg_tol) const;
  double gap(double deg_tol) const;
  void apply(const VectorXcd& x, VectorXcd& y) const;  // y = H x (term-wise)
  double norm_bound() const;  // sum of term norms, cheap upper bound for ||H||
};

SpectralModel assemble(const lattice::SiteSet& S, const std::vector<int>& dims,
                       const std::vector<LocalOperator>& terms,
                       const AssembleOptions& opts = {});

struct LanczosOptions {
  double tol = 1e-8;  // residual target relative to max(1, ||A|| estimate)
  int max_iter = 600;
  unsigned seed = 20240901u;
};

struct LanczosResult {
  Eigen::VectorXd values;
  MatrixXcd vectors;
  Eigen::VectorXd residuals;
};

// Lowest k eigenpairs of a Hermitian operator by sequentially deflated
// Lanczos with full reorthogonalisation. Deterministic for a fixed seed.
LanczosResult lowest_eigenpairs(const ApplyFn& apply, long dim, int k,
                                const LanczosOptions& opts = {});

// max |eigenvalue| of a Hermitian operator given only its action.
double hermitian_norm(const ApplyFn& apply, long dim,
                      const LanczosOptions& opts = {});

// Heisenberg evolution e^{itH} A e^{-itH} through the dense eigenbasis.
LocalOperator heisenberg_evolve(const SpectralModel& M, const LocalOperator& A,
                                double t);

// Gaussian time average sqrt(a/pi) Int e^{itG} O e^{-itG} e^{-a t^2} dt,
// evaluated exactly in the generator's eigenbasis as entrywise damping
// exp(-(E_i - E_j)^2 / (4 a)).
MatrixXcd gaussian_smooth(const Eigen::VectorXd& gen_evals,
                          const MatrixXcd& gen_evecs, const MatrixXcd& O,
                          double alpha);
MatrixXcd gaussian_smooth(const SpectralModel& generator, const MatrixXcd& O,
                          double alpha);

struct GroundSpace {
  MatrixXcd basis;  // dim x degeneracy, orthonormal columns
  double energy = 0.0;
  long degeneracy = 0;
};

// Ground cluster within deg_tol of the lowest retained eigenvalue. On the
// iterative path the retained set must resolve the full cluster.
GroundSpace ground_space(const SpectralModel& M, double deg_tol = 1e-8);

}  // namespace lrlab::quantum
