#include "liesym/determining.hpp"

#include <algorithm>

namespace liesym {

Expr Manifold::apply(const Expr& e) const {
    if (rules.empty()) return e;
    Expr cur = e;
    for (int pass = 0; pass < 64; ++pass) {
        bool hit = false;
        for (const auto& [k, v] : rules) {
            if (cur.contains(k)) {
                hit = true;
                break;
            }
        }
        if (!hit) return cur;
        cur = cur.substitute(rules);
    }
    throw Error("manifold substitution does not reach a fixpoint");
}

Expr solve_for(const Expr& equation, const Atom& coordinate,
               std::vector<Expr>& denominators) {
    Expr a = equation.diff(coordinate);
    if (a.is_zero())
        throw Error("equation is free of its leading derivative " + coordinate.str());
    if (a.contains(coordinate))
        throw Error("equation is not linear in its leading derivative " +
                    coordinate.str());
    Expr b = equation - a * Expr(coordinate);
    if (b.contains(coordinate))
        throw Error("equation is not solvable for " + coordinate.str());
    if (!a.is_rational()) denominators.push_back(a);
    return -b / a;
}

namespace {

// invariant-surface conditions Q_alpha and their consequences, solved for the
// x_{i0}-directed derivatives
void add_conditional_rules(Manifold& man, const Problem& p, const VectorField& vf) {
    const int i0 = p.nonclassical - 1;
    const int r = p.jetorder;
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);
    for (int q : p.qcond) {
        const int alpha = q - 1;
        Expr Q = -vf.eta(alpha, p.n());
        for (int i = 0; i < p.n(); ++i) {
            Expr ui(p.symbols->jet(alpha, {i}));
            if (p.approximate_mode()) ui = expand_dependent(ui, p);
            Q += vf.xi(i) * ui;
        }
        for (int k = 0; k < r; ++k) {
            for (auto& idx : multisets_of_order(p.n(), k)) {
                Expr rel = Q;
                for (int dir : idx) rel = total_derivative(rel, dir, p);
                std::vector<int> target_idx = idx;
                target_idx.push_back(i0);
                if (p.approximate_mode()) {
                    for (int e = 0; e <= p.approxorder; ++e) {
                        Atom target = p.symbols->jet(alpha, target_idx, e);
                        Expr eq = epsilon_coefficient(rel, e);
                        man.rules.emplace(target, solve_for(eq, target, man.denominators));
                    }
                } else {
                    Atom target = p.symbols->jet(alpha, target_idx);
                    man.rules.emplace(target, solve_for(rel, target, man.denominators));
                }
            }
        }
    }
}

void close_rules(Manifold& man) {
    for (int pass = 0; pass < 64; ++pass) {
        bool dirty = false;
        std::map<Atom, Expr> next;
        for (const auto& [k, v] : man.rules) {
            bool contains_key = false;
            for (const auto& [k2, v2] : man.rules)
                if (v.contains(k2)) contains_key = true;
            if (contains_key) {
                dirty = true;
                next.emplace(k, v.substitute(man.rules));
            } else {
                next.emplace(k, v);
            }
        }
        man.rules = std::move(next);
        if (!dirty) return;
    }
    throw Error("manifold closure does not terminate; check the leading derivatives");
}

} // namespace

Manifold solve_leading(const Problem& p) {
    Manifold man;
    if (p.variational) return man; // the variational condition holds off-shell
    if (p.diffeqs.size() != p.leadders.size())
        throw Error("'diffeqs' and 'leadders' must pair up to solve the manifold");
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);

    if (p.nonclassical > 0) {
        VectorField vf = make_generic_generator(p);
        add_conditional_rules(man, p, vf);
    }

    for (size_t e = 0; e < p.diffeqs.size(); ++e) {
        const Atom& lead = p.leadders[e];
        if (!p.diffeqs[e].contains(lead))
            throw Error("equation " + std::to_string(e + 1) +
                        " does not contain its leading derivative " + lead.str());
        if (p.approximate_mode() && lead.kind == AtomKind::Jet && lead.jet->pert < 0) {
            Expr rel = expand_dependent(p.diffeqs[e], p);
            for (int k = 0; k <= p.approxorder; ++k) {
                Atom target = p.symbols->jet(lead.jet->dep_index, lead.jet->index, k);
                Expr eq = epsilon_coefficient(rel, k);
                man.rules.emplace(target, solve_for(eq, target, man.denominators));
            }
        } else {
            man.rules.emplace(lead, solve_for(p.diffeqs[e], lead, man.denominators));
        }
    }
    close_rules(man);
    return man;
}

std::vector<Expr> invariance_condition(const ProlongedField& pf, const Manifold& man,
                                       const Problem& p) {
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);
    const std::set<std::string> frozen =
        p.equivalence_mode() ? p.arbelem_names() : std::set<std::string>{};
    std::vector<Expr> out;
    out.reserve(p.diffeqs.size());
    for (const Expr& delta : p.diffeqs) {
        Expr cond = Expr::zero();
        for (int i = 0; i < p.n(); ++i) {
            Expr d = diff_partial_frozen(delta, p.x_atom(i), frozen);
            if (!d.is_zero()) cond += pf.base.xi(i) * d;
        }
        for (const auto& [coord, coeff] : pf.coeff) {
            Expr d = diff_partial_frozen(delta, coord, frozen);
            if (!d.is_zero()) cond += coeff * d;
        }
        if (p.approximate_mode()) cond = expand_dependent(cond, p);
        cond = man.apply(cond);
        out.push_back(canonicalize(cond));
    }
    return out;
}

std::vector<Expr> DeterminingSystem::at_order(int k) const {
    std::vector<Expr> out;
    for (const auto& eq : equations)
        if (eq.eps_order == k) out.push_back(eq.expr);
    return out;
}

DeterminingSystem split(const std::vector<Expr>& conds, const Problem& p,
                        const VectorField& generic) {
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);
    DeterminingSystem ds;
    ds.unknowns = generic.unknowns;
    ds.approxorder = p.approxorder;
    ds.linear = p.nonclassical == 0;
    for (const auto& name : p.nonzeropars) {
        if (p.symbols->has_kernel(name))
            ds.nonvanishing.push_back(Expr(Atom::kernel_ref(p.symbols->kernel(name))));
        else
            ds.nonvanishing.push_back(Expr(Atom::symbol(name)));
    }

    // jet order below which the unknown kernels may depend on a derivative
    int dep_order = 0;
    for (const auto& name : ds.unknowns)
        for (const Atom& d : p.symbols->kernel(name)->deps)
            if (d.kind == AtomKind::Jet)
                dep_order = std::max(dep_order, d.jet_order());

    const std::set<std::string> arbelems = p.arbelem_names();
    std::set<Atom> nonpoly(p.nonpolyders.begin(), p.nonpolyders.end());
    if (p.approximate_mode()) {
        // the listed derivatives stand for every perturbation level
        for (const Atom& a : p.nonpolyders)
            if (a.kind == AtomKind::Jet && a.jet->pert < 0)
                for (int k = 0; k <= p.approxorder; ++k)
                    nonpoly.insert(p.symbols->jet(a.jet->dep_index, a.jet->index, k));
    }

    std::vector<std::pair<int, Expr>> raw;
    for (const Expr& cond : conds) {
        std::set<Atom> vars;
        for (const Atom& a : cond.atoms()) {
            if (a.kind == AtomKind::Jet && a.jet_order() > dep_order && !nonpoly.count(a)) {
                if (p.approximate_mode() && a.jet->pert < 0)
                    throw Error("unexpanded derivative " + a.str() +
                                " in an approximate invariance condition");
                vars.insert(a);
            }
            if (a.kind == AtomKind::KernelDeriv && arbelems.count(a.kernel->name))
                vars.insert(a); // free derivative of an arbitrary element
            if (a.is_epsilon()) vars.insert(a);
        }
        for (auto& [mono, coeff] : collect_coefficients(cond, vars, arbelems)) {
            int eps = mono.epsilon_exponent();
            if (p.approximate_mode() && eps > p.approxorder) continue;
            raw.emplace_back(eps, coeff.normalized_sign_content());
        }
    }

    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second.str() < b.second.str();
    });
    for (auto& [eps, eq] : raw) {
        if (eq.is_zero()) continue;
        bool dup = false;
        for (const auto& have : ds.equations)
            if (have.eps_order == eps && have.expr.equals(eq)) dup = true;
        if (!dup) ds.equations.push_back({eps, eq});
    }
    return ds;
}

Expr variational_lhs(const ProlongedField& pf, const Expr& lagrangian,
                     const std::vector<Expr>& phis, const Problem& p) {
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);
    Expr cond = Expr::zero();
    for (int i = 0; i < p.n(); ++i) {
        Expr d = lagrangian.diff(p.x_atom(i));
        if (!d.is_zero()) cond += pf.base.xi(i) * d;
    }
    for (const auto& [coord, coeff] : pf.coeff) {
        Expr d = lagrangian.diff(coord);
        if (!d.is_zero()) cond += coeff * d;
    }
    for (int i = 0; i < p.n(); ++i)
        cond += lagrangian * total_derivative(pf.base.xi(i), i, p);
    for (int i = 0; i < p.n(); ++i) {
        if (static_cast<size_t>(i) < phis.size())
            cond -= total_derivative(phis[i], i, p);
    }
    if (p.approximate_mode()) cond = expand_dependent(cond, p);
    return canonicalize(cond);
}

DeterminingPipeline run_determining(const Problem& p, int phi_order) {
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);
    DeterminingPipeline out;
    out.generator = make_generic_generator(p, phi_order);
    out.prolonged = prolong(out.generator, p);
    out.manifold = solve_leading(p);
    if (p.variational) {
        out.conditions = {variational_lhs(out.prolonged, *p.lagrangian,
                                          out.generator.phis, p)};
    } else {
        out.conditions = invariance_condition(out.prolonged, out.manifold, p);
    }
    out.system = split(out.conditions, p, out.generator);
    for (const Expr& d : out.manifold.denominators)
        out.system.nonvanishing.push_back(d);
    return out;
}

} // namespace liesym
