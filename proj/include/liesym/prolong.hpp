#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "liesym/expr.hpp"
#include "liesym/problem.hpp"

namespace liesym {

enum class Flavor { Point, Contact, Approximate, Equivalence };

std::string flavor_name(Flavor f);

// Infinitesimal generator. Components are ordered: one xi per independent
// variable, one eta per dependent variable, and one mu per arbitrary element
// in equivalence mode. Contact fields carry the characteristic function,
// variational candidates the divergence potentials phi_i.
struct VectorField {
    Flavor flavor = Flavor::Point;
    std::vector<Expr> components;
    std::optional<Expr> omega;
    std::vector<Expr> phis;
    // kernel-name bindings this field was built from, when known
    std::map<std::string, Expr> bindings;
    // unknown kernels of a generic generator
    std::vector<std::string> unknowns;

    Expr xi(int i) const { return components.at(i); }
    Expr eta(int alpha, int n) const { return components.at(n + alpha); }
};

// Coefficients of the prolonged generator, keyed by coordinate atom:
// order-0 jets map to eta_alpha, order-k jets to eta_[alpha,I], arbitrary
// elements to mu_j, their derivative coordinates to mu_[j,B].
struct ProlongedField {
    VectorField base;
    std::map<Atom, Expr> coeff;

    const Expr& coefficient(const Atom& coordinate) const;
};

// Generator with unknown kernels named after the variables (xi_t, eta_u,
// mu_f, omega, phi_t, and xi0_t, eta1_u, ... in approximate mode), each
// registered with the dependency list the mode dictates. The nonclassical
// normalization fixes xi_i = 1 and xi_j = 0 for j < i.
// phi_order caps the jet order of the variational potentials; -1 means the
// default jetorder - 1.
VectorField make_generic_generator(const Problem& p, int phi_order = -1);

ProlongedField prolong(const VectorField& vf, const Problem& p);
ProlongedField prolong_point(const VectorField& vf, const Problem& p);
ProlongedField prolong_contact(const Expr& omega, const Problem& p);
ProlongedField prolong_approx(const VectorField& vf, const Problem& p);
ProlongedField prolong_equivalence(const VectorField& vf, const Problem& p);

// Contact components (xi_i, eta, eta_[,i]) induced by a characteristic
// function; in approximate mode omega is already epsilon-assembled.
VectorField contact_field_from_omega(const Expr& omega, const Problem& p);

// Linear recursion operator of the approximate theory: shifts perturbation
// levels of kernels and jet variables, obeying the product rule.
Expr recursion_operator(const Expr& e, const Problem& p);

// Epsilon-assembled component from the level-0 kernel of a family.
Expr assemble_epsilon_series(const Expr& level0, const Problem& p);

} // namespace liesym
