#pragma once

#include <optional>
#include <vector>

#include "liesym/expr.hpp"

namespace liesym {

using QVec = std::vector<Rational>;
using QMat = std::vector<QVec>;

// Rank of a rational matrix (fraction-free elimination after clearing
// denominators).
int q_rank(QMat a);

// Nullspace basis of a homogeneous system, one vector per free column, each
// scaled so its first nonzero entry is 1. Deterministic.
std::vector<QVec> q_nullspace(const QMat& a, size_t cols);

// Coordinates x with sum_k x_k * rows[k] = target, if they exist.
std::optional<QVec> q_express(const std::vector<QVec>& rows, const QVec& target);

// Reduced row echelon form (in place); returns the rank.
int q_rref(QMat& a);

// Symbolic matrices. Entries are cleared of denominators row by row (the
// denominators are assumed nonzero); rank is the generic rank over the
// rational-function field. Pivot expressions are reported when requested.
int sym_rank(std::vector<std::vector<Expr>> m, std::vector<Expr>* pivots = nullptr);

// Determinant of a square matrix of polynomial expressions (Bareiss).
Expr sym_det(std::vector<std::vector<Expr>> m);

} // namespace liesym
