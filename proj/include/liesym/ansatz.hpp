#pragma once

#include <map>
#include <string>
#include <vector>

#include "liesym/determining.hpp"
#include "liesym/expr.hpp"
#include "liesym/linalg.hpp"
#include "liesym/problem.hpp"
#include "liesym/prolong.hpp"

namespace liesym {

// Basis of generator fields solving a linear determining system, plus
// bookkeeping mirroring the solver report.
struct SolutionSet {
    std::vector<VectorField> basis;
    std::vector<std::string> parameters;      // k_1 ... k_s, one per basis field
    std::vector<Expr> residual_constraints;   // conditions left unsolved
    std::vector<Expr> nonvanishing;
    // superposition family of a linear system (eta_alpha = f_alpha with the
    // f's constrained by residual_constraints)
    std::vector<VectorField> infinite_family;
    std::vector<std::string> function_parameters;
    int degree = 0;
    long monomial_count = 0;
    long rows = 0;
    long cols = 0;
    long nullity = 0;
};

// Replaces every unknown kernel by a polynomial of degree <= degree in each
// of its declared arguments with fresh rational coefficients, splits over the
// arguments, and computes the exact nullspace. Throws if the system is
// nonlinear or the ansatz exceeds the coefficient cap.
SolutionSet ansatz_solve(const DeterminingSystem& ds, const Problem& p, int degree,
                         long coefficient_cap = 200000);

struct ResidualEntry {
    int eps_order;
    Expr residual;
    bool conditional; // became zero only after applying user constraints
};

struct ResidualReport {
    size_t field_index = 0;
    std::vector<ResidualEntry> residuals; // one per determining equation
    bool all_zero = true;
};

using RewriteRules = std::vector<std::pair<Atom, Expr>>;

// Substitutes each field's kernel bindings into the determining system and
// reports the residuals. Constraints are applied as rewrite rules (closed
// under differentiation for kernel derivatives) before the zero test.
std::vector<ResidualReport> verify(const std::vector<VectorField>& fields,
                                   const DeterminingSystem& ds, const Problem& p,
                                   const RewriteRules& constraints = {});

// Kernel bindings for a field given by components (used when a solution file
// provides component lists instead of per-kernel bindings).
std::map<std::string, Expr> derive_bindings(const VectorField& field, const Problem& p);

// Applies rewrite rules to a fixpoint; rules whose left side is a kernel
// derivative also rewrite higher derivatives of the same kernel.
Expr apply_rewrite_rules(const Expr& e, const RewriteRules& rules);

struct EssentialResult {
    std::vector<size_t> kept;
    // index of a discarded field -> its coordinates over the kept ones
    std::map<size_t, QVec> certificates;
};

EssentialResult essential_generators(const std::vector<VectorField>& fields);

// Stacked rational coefficient matrix of polynomial vector fields over a
// shared monomial index; used for span and rank arguments.
QMat field_coefficient_matrix(const std::vector<VectorField>& fields);
QMat field_coefficient_matrix2(const std::vector<VectorField>& a,
                               const std::vector<VectorField>& b, QMat& bm);

} // namespace liesym
