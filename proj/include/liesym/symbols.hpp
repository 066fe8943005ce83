#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "liesym/expr.hpp"

namespace liesym {

// Registry of identifiers: problem variables, declared function kernels with
// their dependency lists, and plain symbols. k_1, k_2, ... are reserved
// constants and register themselves on first sight; f_1, f_2, ... are
// reserved function names and must be declared with dependencies.
class SymbolTable {
public:
    SymbolTable() = default;

    void set_variables(std::vector<std::string> xvar, std::vector<std::string> uvar,
                       int approxorder = 0);

    const std::vector<std::string>& xvar() const { return xvar_; }
    const std::vector<std::string>& uvar() const { return uvar_; }
    int approxorder() const { return approxorder_; }
    int xvar_index(const std::string& name) const;
    int uvar_index(const std::string& name) const;

    void register_symbol(const std::string& name);
    KernelPtr register_kernel(const std::string& name, std::vector<Atom> deps);
    bool has_kernel(const std::string& name) const { return kernels_.count(name) != 0; }
    KernelPtr kernel(const std::string& name) const;
    bool has_symbol(const std::string& name) const { return symbols_.count(name) != 0; }
    std::vector<std::string> kernel_names() const;

    // Jet atoms; the multi-index is given as xvar positions and gets sorted.
    Atom jet(int dep_index, std::vector<int> index, int pert = -1) const;
    Atom jet_extend(const Atom& jet_atom, int direction) const;
    Atom symbol_atom(const std::string& name) const { return Atom::symbol(name); }

    // Identifier resolution used by the expression parser.
    Atom resolve(const std::string& ident);
    bool is_unary_op(const std::string& ident) const;

    // True when the name would be read as a jet-variable token.
    bool collides_with_jet_name(const std::string& name) const;

    // Perturbation families in approximate mode: the level-k member of a
    // kernel family (xi0_x, xi1_x, ... for family "xi_x").
    void tag_family(const std::string& kernel_name, const std::string& family, int level);
    std::optional<std::pair<std::string, int>> family_of(const std::string& kernel_name) const;
    KernelPtr family_member(const std::string& family, int level) const;

private:
    std::map<std::string, std::pair<std::string, int>> family_of_;
    std::map<std::pair<std::string, int>, std::string> family_member_;
    std::vector<std::string> xvar_, uvar_;
    int approxorder_ = 0;
    std::map<std::string, KernelPtr> kernels_;
    std::set<std::string> symbols_;

    bool parse_index_tail(const std::string& tail, std::vector<int>& out) const;
    bool parse_dep_head(const std::string& head, int& dep_index, int& pert) const;
};

} // namespace liesym
