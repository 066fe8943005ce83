#pragma once

#include <map>
#include <string>
#include <vector>

#include "liesym/expr.hpp"
#include "liesym/problem.hpp"
#include "liesym/prolong.hpp"

namespace liesym {

// Solved leading derivatives (and, in conditional mode, the invariant-surface
// conditions plus their differential consequences), closed under substitution.
struct Manifold {
    std::map<Atom, Expr> rules;
    std::vector<Expr> denominators; // expressions divided by while solving

    Expr apply(const Expr& e) const;
    bool empty() const { return rules.empty(); }
};

Manifold solve_leading(const Problem& p);

struct DetEq {
    int eps_order = 0;
    Expr expr;
};

struct DeterminingSystem {
    std::vector<DetEq> equations;
    std::vector<std::string> unknowns;   // kernel names of the infinitesimals
    bool linear = true;
    int approxorder = 0;
    std::vector<Expr> nonvanishing;

    std::vector<Expr> at_order(int k) const;
};

// One expression per equation: the prolonged generator applied to it,
// restricted to the manifold (epsilon-expanded and truncated in approximate
// mode).
std::vector<Expr> invariance_condition(const ProlongedField& pf, const Manifold& man,
                                       const Problem& p);

// Splits the conditions by monomials in the free derivatives; coefficients
// are content-normalized, deduplicated, and grouped by epsilon order.
DeterminingSystem split(const std::vector<Expr>& conds, const Problem& p,
                        const VectorField& generic);

// Full pipeline for the problem's mode: generic generator, prolongation,
// manifold, invariance, split. For variational problems the condition comes
// from the Lagrangian (see noether.hpp) but splits identically.
struct DeterminingPipeline {
    VectorField generator;
    ProlongedField prolonged;
    Manifold manifold;
    std::vector<Expr> conditions;
    DeterminingSystem system;
};

DeterminingPipeline run_determining(const Problem& p, int phi_order = -1);

// Linear solve of `equation` for `coordinate`; the equation must be linear in
// it with a coordinate-free coefficient. Non-constant divisors are appended
// to `denominators`.
Expr solve_for(const Expr& equation, const Atom& coordinate,
               std::vector<Expr>& denominators);

// Left side of the variational-symmetry condition minus the divergence of the
// potentials: prolonged generator applied to the Lagrangian, plus L times the
// divergence of xi, minus sum_i D_i phi_i. Zero iff (vf, phi) is variational.
Expr variational_lhs(const ProlongedField& pf, const Expr& lagrangian,
                     const std::vector<Expr>& phis, const Problem& p);

} // namespace liesym
