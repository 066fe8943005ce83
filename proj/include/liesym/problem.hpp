#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "liesym/expr.hpp"
#include "liesym/symbols.hpp"

namespace liesym {

// Declarative description of a symmetry task, read from a problem file.
struct Problem {
    int jetorder = 0;
    std::vector<std::string> xvar;
    std::vector<std::string> uvar;
    std::vector<Expr> diffeqs;    // left-hand sides, zero right-hand sides
    std::vector<Atom> leadders;   // jet variables or derivative coordinates
    int nonclassical = 0;         // 0, or 1-based index into xvar
    std::vector<int> qcond;       // 1-based indices into uvar
    bool contact = false;
    bool variational = false;
    std::optional<Expr> lagrangian;
    int approxorder = 0;
    std::vector<std::string> arbelem;
    int arborder = -1;
    int zorder = 0;
    bool generalequiv = false;
    std::vector<Atom> nonpolyders;
    std::vector<std::string> freepars;
    std::vector<std::string> nonzeropars;
    std::map<std::string, Expr> assumptions; // pinned parameter values
    std::vector<std::string> warnings;

    std::shared_ptr<SymbolTable> symbols;

    int n() const { return static_cast<int>(xvar.size()); }
    int m() const { return static_cast<int>(uvar.size()); }
    bool equivalence_mode() const { return !arbelem.empty(); }
    bool approximate_mode() const { return approxorder >= 1; }

    Atom x_atom(int i) const { return Atom::symbol(xvar.at(i)); }

    // Jet coordinates of order 0..max_order for one perturbation level,
    // ordered by (order, dependent index, multi-index).
    std::vector<Atom> jet_coordinates(int max_order, int pert = -1) const;

    // Arguments z of the arbitrary elements: independent variables, dependent
    // variables, and derivatives up to zorder.
    std::vector<Atom> z_coordinates() const;

    KernelPtr arbelem_kernel(int j) const { return symbols->kernel(arbelem.at(j)); }
    std::set<std::string> arbelem_names() const {
        return {arbelem.begin(), arbelem.end()};
    }
};

Problem load_problem(const std::string& text);

// Sorted multisets of size k over {0,...,n-1}, in lexicographic order.
std::vector<std::vector<int>> multisets_of_order(int n, int k);

// Lie (total) derivative along x_i. The checked form rejects input whose
// derivative would leave the jetorder-th jet space.
Expr total_derivative(const Expr& e, int i, const Problem& p);
Expr total_derivative_unbounded(const Expr& e, int i, const Problem& p);

// Lie derivative along z_beta over the arbitrary-element argument space.
Expr total_derivative_equiv(const Expr& e, int beta, const Problem& p);

// Approximate-mode expansion u_{alpha,J} -> sum_k eps^k u_(k)alpha,J applied
// to every plain jet variable present (requires an active epsilon truncation).
Expr expand_dependent(const Expr& e, const Problem& p);

} // namespace liesym
