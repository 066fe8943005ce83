#include "liesym/prolong.hpp"

#include <algorithm>

namespace liesym {

std::string flavor_name(Flavor f) {
    switch (f) {
    case Flavor::Point: return "point";
    case Flavor::Contact: return "contact";
    case Flavor::Approximate: return "approximate";
    case Flavor::Equivalence: return "equivalence";
    }
    return "?";
}

const Expr& ProlongedField::coefficient(const Atom& coordinate) const {
    auto it = coeff.find(coordinate);
    if (it == coeff.end())
        throw Error("no prolonged coefficient for coordinate " + coordinate.str());
    return it->second;
}

// ---------------------------------------------------------------------------
// generic generators

namespace {

KernelPtr declare(SymbolTable& st, const std::string& name, const std::vector<Atom>& deps) {
    if (st.has_kernel(name)) return st.kernel(name);
    return st.register_kernel(name, deps);
}

Expr declared(VectorField& vf, SymbolTable& st, const std::string& name,
              const std::vector<Atom>& deps) {
    KernelPtr k = declare(st, name, deps);
    vf.unknowns.push_back(name);
    return Expr(Atom::kernel_ref(k));
}

std::vector<Atom> point_deps(const Problem& p, int pert_base) {
    std::vector<Atom> deps;
    for (int i = 0; i < p.n(); ++i) deps.push_back(p.x_atom(i));
    for (int a = 0; a < p.m(); ++a)
        deps.push_back(p.symbols->jet(a, {}, pert_base));
    return deps;
}

std::vector<Atom> first_order_jets(const Problem& p, int pert) {
    std::vector<Atom> out;
    for (int a = 0; a < p.m(); ++a)
        for (int i = 0; i < p.n(); ++i) out.push_back(p.symbols->jet(a, {i}, pert));
    return out;
}

} // namespace

VectorField make_generic_generator(const Problem& p, int phi_order) {
    SymbolTable& st = *p.symbols;
    VectorField vf;

    if (p.contact) {
        // single characteristic function of (x, u, first derivatives)
        std::vector<Atom> deps;
        for (int i = 0; i < p.n(); ++i) deps.push_back(p.x_atom(i));
        if (!p.approximate_mode()) {
            deps.push_back(st.jet(0, {}));
            for (int i = 0; i < p.n(); ++i) deps.push_back(st.jet(0, {i}));
            declare(st, "omega", deps);
            vf = contact_field_from_omega(Expr(Atom::kernel_ref(st.kernel("omega"))), p);
            vf.unknowns = {"omega"};
            return vf;
        }
        deps.push_back(st.jet(0, {}, 0));
        for (int i = 0; i < p.n(); ++i) deps.push_back(st.jet(0, {i}, 0));
        std::vector<std::string> unknowns;
        for (int k = 0; k <= p.approxorder; ++k) {
            std::string name = "omega" + std::to_string(k);
            declare(st, name, deps);
            st.tag_family(name, "omega", k);
            unknowns.push_back(name);
        }
        EpsilonTruncation scope(p.approxorder);
        Expr omega = assemble_epsilon_series(
            Expr(Atom::kernel_ref(st.kernel("omega0"))), p);
        vf = contact_field_from_omega(omega, p);
        vf.unknowns = std::move(unknowns);
        return vf;
    }

    if (p.equivalence_mode()) {
        std::vector<Atom> xu_deps = point_deps(p, -1);
        std::vector<Atom> mu_deps = xu_deps;
        for (const auto& name : p.arbelem)
            mu_deps.push_back(Atom::kernel_ref(st.kernel(name)));
        const std::vector<Atom>& xe_deps = p.generalequiv ? mu_deps : xu_deps;
        vf.flavor = Flavor::Equivalence;
        for (int i = 0; i < p.n(); ++i)
            vf.components.push_back(declared(vf, st, "xi_" + p.xvar[i], xe_deps));
        for (int a = 0; a < p.m(); ++a)
            vf.components.push_back(declared(vf, st, "eta_" + p.uvar[a], xe_deps));
        for (const auto& name : p.arbelem)
            vf.components.push_back(declared(vf, st, "mu_" + name, mu_deps));
        return vf;
    }

    if (p.approximate_mode()) {
        std::vector<Atom> deps = point_deps(p, 0);
        vf.flavor = Flavor::Approximate;
        EpsilonTruncation scope(p.approxorder);
        auto family = [&](const std::string& fam) {
            for (int k = 0; k <= p.approxorder; ++k) {
                std::string name = fam;
                auto us = name.find('_');
                name.insert(us, std::to_string(k)); // xi_t -> xi0_t
                declare(st, name, deps);
                st.tag_family(name, fam, k);
                vf.unknowns.push_back(name);
            }
            return assemble_epsilon_series(Expr(Atom::kernel_ref(st.family_member(fam, 0))), p);
        };
        for (int i = 0; i < p.n(); ++i) {
            if (p.nonclassical == i + 1) {
                vf.components.push_back(Expr::one()); // tilde-xi_(k)i = 0 for k >= 1
            } else if (p.nonclassical > 0 && i + 1 < p.nonclassical) {
                vf.components.push_back(Expr::zero());
            } else {
                vf.components.push_back(family("xi_" + p.xvar[i]));
            }
        }
        for (int a = 0; a < p.m(); ++a)
            vf.components.push_back(family("eta_" + p.uvar[a]));
        if (p.variational)
            for (int i = 0; i < p.n(); ++i)
                vf.phis.push_back(family("phi_" + p.xvar[i]));
        return vf;
    }

    // exact point generator
    std::vector<Atom> deps = point_deps(p, -1);
    vf.flavor = Flavor::Point;
    for (int i = 0; i < p.n(); ++i) {
        if (p.nonclassical == i + 1) {
            vf.components.push_back(Expr::one());
        } else if (p.nonclassical > 0 && i + 1 < p.nonclassical) {
            vf.components.push_back(Expr::zero());
        } else {
            vf.components.push_back(declared(vf, st, "xi_" + p.xvar[i], deps));
        }
    }
    for (int a = 0; a < p.m(); ++a)
        vf.components.push_back(declared(vf, st, "eta_" + p.uvar[a], deps));
    if (p.variational) {
        int cap = phi_order < 0 ? std::max(0, p.jetorder - 1) : phi_order;
        std::vector<Atom> phi_deps;
        for (int i = 0; i < p.n(); ++i) phi_deps.push_back(p.x_atom(i));
        for (int k = 0; k <= cap; ++k)
            for (int a = 0; a < p.m(); ++a)
                for (auto& idx : multisets_of_order(p.n(), k))
                    phi_deps.push_back(st.jet(a, idx));
        for (int i = 0; i < p.n(); ++i)
            vf.phis.push_back(declared(vf, st, "phi_" + p.xvar[i], phi_deps));
    }
    return vf;
}

VectorField contact_field_from_omega(const Expr& omega, const Problem& p) {
    if (p.m() != 1)
        throw Error("contact transformations require exactly one dependent variable");
    VectorField vf;
    vf.flavor = p.approximate_mode() ? Flavor::Approximate : Flavor::Point;
    vf.omega = omega;
    const int pert = p.approximate_mode() ? 0 : -1;
    Expr eta = omega;
    std::vector<Expr> xis;
    for (int i = 0; i < p.n(); ++i) {
        Atom ui = p.symbols->jet(0, {i}, pert);
        Expr d = omega.diff(ui);
        xis.push_back(-d);
        Expr u_i = p.approximate_mode()
                       ? expand_dependent(Expr(p.symbols->jet(0, {i})), p)
                       : Expr(ui);
        eta -= u_i * d;
    }
    vf.components = std::move(xis);
    vf.components.push_back(eta);
    vf.flavor = Flavor::Contact;
    return vf;
}

// ---------------------------------------------------------------------------
// prolongations

namespace {

// shared recursion: eta_[alpha,I] = D(eta_[alpha,I']) - sum_j u_{alpha,jI'} D(xi_j),
// with the jet factor epsilon-expanded in approximate mode
void run_point_recursion(ProlongedField& pf, const Problem& p, int from_order) {
    const bool approx = p.approximate_mode();
    for (int k = from_order; k <= p.jetorder; ++k) {
        for (int alpha = 0; alpha < p.m(); ++alpha) {
            for (auto& idx : multisets_of_order(p.n(), k)) {
                int last = idx.back();
                std::vector<int> head(idx.begin(), idx.end() - 1);
                const Expr& prev = pf.coefficient(p.symbols->jet(alpha, head));
                Expr coeff = total_derivative(prev, last, p);
                for (int j = 0; j < p.n(); ++j) {
                    Expr dxi = total_derivative(pf.base.xi(j), last, p);
                    if (dxi.is_zero()) continue;
                    std::vector<int> ext = head;
                    ext.push_back(j);
                    Expr jet_factor(p.symbols->jet(alpha, ext));
                    if (approx) jet_factor = expand_dependent(jet_factor, p);
                    coeff -= jet_factor * dxi;
                }
                pf.coeff.emplace(p.symbols->jet(alpha, idx), coeff);
            }
        }
    }
}

} // namespace

ProlongedField prolong_point(const VectorField& vf, const Problem& p) {
    ProlongedField pf;
    pf.base = vf;
    for (int alpha = 0; alpha < p.m(); ++alpha)
        pf.coeff.emplace(p.symbols->jet(alpha, {}), vf.eta(alpha, p.n()));
    run_point_recursion(pf, p, 1);
    return pf;
}

ProlongedField prolong_contact(const Expr& omega, const Problem& p) {
    if (p.m() != 1)
        throw Error("contact transformations require exactly one dependent variable");
    const int pert = p.approximate_mode() ? 0 : -1;
    for (const Atom& a : omega.atoms())
        if (a.kind == AtomKind::Jet && a.jet_order() > 1)
            throw Error("characteristic function depends on " + a.str() +
                        "; only first-order derivatives are allowed");
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);
    VectorField vf = contact_field_from_omega(omega, p);
    ProlongedField pf;
    pf.base = vf;
    pf.coeff.emplace(p.symbols->jet(0, {}), vf.eta(0, p.n()));
    // eta_[,i] = dOmega/dx_i + u_,i dOmega/du from the characteristic relations
    Atom u0 = p.symbols->jet(0, {}, pert);
    for (int i = 0; i < p.n(); ++i) {
        Expr u_i = p.approximate_mode()
                       ? expand_dependent(Expr(p.symbols->jet(0, {i})), p)
                       : Expr(p.symbols->jet(0, {i}));
        pf.coeff.emplace(p.symbols->jet(0, {i}),
                         omega.diff(p.x_atom(i)) + u_i * omega.diff(u0));
    }
    run_point_recursion(pf, p, 2);
    return pf;
}

ProlongedField prolong_approx(const VectorField& vf, const Problem& p) {
    if (!p.approximate_mode()) throw Error("prolong_approx requires approxorder >= 1");
    for (const Expr& c : vf.components)
        if (epsilon_degree(c) > p.approxorder)
            throw Error("generator component carries epsilon beyond approxorder");
    EpsilonTruncation scope(p.approxorder);
    ProlongedField pf;
    pf.base = vf;
    for (int alpha = 0; alpha < p.m(); ++alpha)
        pf.coeff.emplace(p.symbols->jet(alpha, {}), vf.eta(alpha, p.n()));
    run_point_recursion(pf, p, 1);
    return pf;
}

ProlongedField prolong_equivalence(const VectorField& vf, const Problem& p) {
    if (!p.equivalence_mode())
        throw Error("prolong_equivalence requires arbitrary elements");
    ProlongedField pf = prolong_point(vf, p);

    // infinitesimals of the z coordinates
    std::vector<Atom> z = p.z_coordinates();
    std::vector<Expr> zeta;
    for (int i = 0; i < p.n(); ++i) zeta.push_back(vf.xi(i));
    for (size_t g = p.n(); g < z.size(); ++g) zeta.push_back(pf.coefficient(z[g]));

    const int N = static_cast<int>(z.size());
    const int ell = static_cast<int>(p.arbelem.size());
    for (int j = 0; j < ell; ++j) {
        KernelPtr pk = p.symbols->kernel(p.arbelem[j]);
        pf.coeff.emplace(Atom::kernel_ref(pk), vf.components.at(p.n() + p.m() + j));
        // directions the element actually depends on
        std::vector<int> dirs;
        for (int b = 0; b < N; ++b)
            for (const Atom& d : pk->deps)
                if (d == z[b]) dirs.push_back(b);
        for (int k = 1; k <= p.arborder; ++k) {
            for (auto& pick : multisets_of_order(static_cast<int>(dirs.size()), k)) {
                std::vector<Atom> dvars;
                for (int t : pick) dvars.push_back(z[dirs[t]]);
                int beta = dirs[pick.back()];
                std::vector<Atom> head(dvars.begin(), dvars.end() - 1);
                const Expr& prev = pf.coefficient(
                    head.empty() ? Atom::kernel_ref(pk)
                                 : Atom::kernel_deriv(pk, head));
                Expr coeff = total_derivative_equiv(prev, beta, p);
                for (int g = 0; g < N; ++g) {
                    bool declared = false;
                    for (const Atom& d : pk->deps)
                        if (d == z[g]) declared = true;
                    if (!declared) continue;
                    Expr dz = total_derivative_equiv(zeta[g], beta, p);
                    if (dz.is_zero()) continue;
                    std::vector<Atom> ext = head;
                    ext.push_back(z[g]);
                    coeff -= Expr(Atom::kernel_deriv(pk, std::move(ext))) * dz;
                }
                pf.coeff.emplace(Atom::kernel_deriv(pk, std::move(dvars)), coeff);
            }
        }
    }
    return pf;
}

ProlongedField prolong(const VectorField& vf, const Problem& p) {
    if (p.equivalence_mode()) return prolong_equivalence(vf, p);
    if (p.contact) {
        if (!vf.omega) throw Error("contact prolongation needs a characteristic function");
        return prolong_contact(*vf.omega, p);
    }
    if (p.approximate_mode()) return prolong_approx(vf, p);
    return prolong_point(vf, p);
}

// ---------------------------------------------------------------------------
// approximate recursion operator

namespace {

Expr recursion_on_atom(const Atom& a, const Problem& p) {
    SymbolTable& st = *p.symbols;
    switch (a.kind) {
    case AtomKind::Symbol:
        return Expr::zero();
    case AtomKind::Jet: {
        if (a.jet->pert < 0)
            throw Error("recursion operator on the unexpanded variable " + a.str());
        int k = a.jet->pert;
        if (k + 1 > p.approxorder) return Expr::zero(); // truncated away
        return Expr(rat(k + 1)) * Expr(st.jet(a.jet->dep_index, a.jet->index, k + 1));
    }
    case AtomKind::Kernel:
    case AtomKind::KernelDeriv: {
        auto fam = st.family_of(a.kernel->name);
        if (!fam)
            throw Error("recursion operator on '" + a.kernel->name +
                        "', which has no perturbation level");
        Expr out = Expr::zero();
        if (fam->second + 1 <= p.approxorder) {
            KernelPtr next = st.family_member(fam->first, fam->second + 1);
            out = Expr(a.kind == AtomKind::Kernel
                           ? Atom::kernel_ref(next)
                           : Atom::kernel_deriv(next, a.dvars));
        }
        for (const Atom& d : a.kernel->deps) {
            if (d.kind != AtomKind::Jet || d.jet->pert != 0) continue;
            std::vector<Atom> dv = a.dvars;
            dv.push_back(d);
            out += Expr(Atom::kernel_deriv(a.kernel, std::move(dv))) *
                   Expr(st.jet(d.jet->dep_index, d.jet->index, 1));
        }
        return out;
    }
    case AtomKind::Unary:
        throw Error("recursion operator on " + a.str() + " is not defined");
    }
    return Expr::zero();
}

} // namespace

Expr recursion_operator(const Expr& e, const Problem& p) {
    if (e.has_denominator())
        throw Error("recursion operator on a quotient expression");
    Expr out = Expr::zero();
    for (const auto& t : e.num().terms()) {
        for (size_t k = 0; k < t.mono.factors.size(); ++k) {
            const auto& [atom, exp] = t.mono.factors[k];
            Expr da = recursion_on_atom(atom, p);
            if (da.is_zero()) continue;
            Expr rest(t.coeff * exp);
            for (size_t j = 0; j < t.mono.factors.size(); ++j) {
                int e2 = t.mono.factors[j].second - (j == k ? 1 : 0);
                if (e2 > 0) rest *= Expr(t.mono.factors[j].first).pow(e2);
            }
            out += rest * da;
        }
    }
    return out;
}

Expr assemble_epsilon_series(const Expr& level0, const Problem& p) {
    Expr eps(Atom::symbol("epsilon"));
    Expr out = level0;
    Expr level = level0;
    for (int k = 1; k <= p.approxorder; ++k) {
        level = recursion_operator(level, p) / Expr(rat(k));
        out += eps.pow(k) * level;
    }
    return out;
}

} // namespace liesym
