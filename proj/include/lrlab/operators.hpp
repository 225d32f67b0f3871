#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lrlab/common.hpp"

namespace lrlab::quantum {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Operator acting on an ordered tuple of sites (strictly increasing ambient
// site indices) with the given local dimensions; mat is dense on the tensor
// product of the listed factors, row-major composite indexing.
struct LocalOperator {
  std::vector<long> support;
  std::vector<int> dims;
  MatrixXcd mat;

  long dimension() const;
  void validate() const;
};

LocalOperator local_op(std::vector<long> support, std::vector<int> dims, MatrixXcd mat);

// Pauli matrices: k = 0 identity, 1..3 sigma^x, sigma^y, sigma^z.
MatrixXcd pauli(int k);
// Spin-s matrices for 2s = twoS, Condon-Shortley phases, basis m = s..-s.
// k = 1,2,3 components; k = 0 identity.
MatrixXcd spin_matrix(int twoS, int k);

MatrixXcd kron(const MatrixXcd& A, const MatrixXcd& B);

// Precomputed index tables for embedding an operator with support at the
// given positions (strictly increasing) of a region with the given local
// dimensions.
struct EmbedPlan {
  std::vector<long> sup_off;
  std::vector<long> comp_off;
  long region_dim = 0;
  long sup_dim = 0;
};

EmbedPlan embed_plan(const std::vector<int>& region_dims,
                     const std::vector<long>& positions);

MatrixXcd embed(const MatrixXcd& A, const EmbedPlan& plan);
// Convenience: embed a LocalOperator into the region spanned by the ordered
// site list region_sites (support must be a subset).
MatrixXcd embed(const LocalOperator& A, const std::vector<long>& region_sites,
                const std::vector<int>& region_dims);

void apply_embedded(const MatrixXcd& A, const EmbedPlan& plan,
                    const VectorXcd& x, VectorXcd& y);  // y += (A embedded) x

// Partial trace of M over the positions NOT listed in keep (keep strictly
// increasing positions into dims; result ordered as keep).
MatrixXcd partial_trace(const MatrixXcd& M, const std::vector<int>& dims,
                        const std::vector<long>& keep);

// Operator 2-norm: full SVD for dim <= 512, else power iteration on C^dag C
// (tolerance 1e-10, iteration cap 1e4).
double op_norm(const MatrixXcd& M);

// ||[A, B]|| on the union of the supports.
double commutator_norm(const LocalOperator& A, const LocalOperator& B);

// A*B as an operator on the union support.
LocalOperator product(const LocalOperator& A, const LocalOperator& B);

}  // namespace lrlab::quantum
