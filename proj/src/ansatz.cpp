#include "liesym/ansatz.hpp"

#include <algorithm>

namespace liesym {

namespace {

Atom coefficient_symbol(long i) { return Atom::symbol("@c" + std::to_string(i)); }

bool is_coefficient(const Atom& a) {
    return a.kind == AtomKind::Symbol && a.name.rfind("@c", 0) == 0;
}

std::map<Atom, Expr> assumption_map(const Problem& p) {
    std::map<Atom, Expr> m;
    for (const auto& [name, value] : p.assumptions) {
        if (p.symbols->has_kernel(name))
            m.emplace(Atom::kernel_ref(p.symbols->kernel(name)), value);
        else
            m.emplace(Atom::symbol(name), value);
    }
    return m;
}

// all exponent tuples with every exponent <= degree
void exponent_tuples(size_t nvars, int degree, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(nvars, 0);
    while (true) {
        out.push_back(cur);
        size_t k = 0;
        while (k < nvars) {
            if (++cur[k] <= degree) break;
            cur[k] = 0;
            ++k;
        }
        if (k == nvars) break;
    }
}

// substitution of kernel bindings into an expression, differentiating the
// bindings for kernel-derivative atoms
Expr substitute_bindings(const Expr& e, const std::map<std::string, Expr>& bindings) {
    std::map<Atom, Expr> map;
    for (const Atom& a : e.atoms()) {
        if (a.kind == AtomKind::Kernel) {
            auto it = bindings.find(a.kernel->name);
            if (it != bindings.end()) map.emplace(a, it->second);
        } else if (a.kind == AtomKind::KernelDeriv) {
            auto it = bindings.find(a.kernel->name);
            if (it == bindings.end()) continue;
            Expr d = it->second;
            for (const Atom& v : a.dvars) d = d.diff(v);
            map.emplace(a, d);
        }
    }
    return e.substitute(map);
}

} // namespace

SolutionSet ansatz_solve(const DeterminingSystem& ds, const Problem& p, int degree,
                         long coefficient_cap) {
    if (!ds.linear)
        throw Error("the determining system is nonlinear; solve it by verification "
                    "with candidate infinitesimals instead");
    if (degree < 0) throw Error("ansatz degree must be >= 0");
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);

    SolutionSet sol;
    sol.degree = degree;
    sol.nonvanishing = ds.nonvanishing;

    // polynomial ansatz per kernel, degree <= `degree` in each argument
    std::map<std::string, Expr> ansatz;
    std::vector<std::pair<std::string, Monomial>> columns; // coefficient index
    long next_c = 0;
    for (const auto& name : ds.unknowns) {
        KernelPtr k = p.symbols->kernel(name);
        std::vector<std::vector<int>> tuples;
        exponent_tuples(k->deps.size(), degree, tuples);
        long need = next_c + static_cast<long>(tuples.size());
        if (need > coefficient_cap)
            throw Error("ansatz needs " + std::to_string(need) +
                        " coefficients, above the cap of " + std::to_string(coefficient_cap) +
                        "; raise the cap or lower the degree");
        Expr body = Expr::zero();
        for (const auto& tup : tuples) {
            Expr mono = Expr(coefficient_symbol(next_c));
            Monomial label;
            for (size_t i = 0; i < tup.size(); ++i) {
                if (tup[i] > 0) {
                    mono = mono * Expr(k->deps[i]).pow(tup[i]);
                    label.factors.emplace_back(k->deps[i], tup[i]);
                }
            }
            std::sort(label.factors.begin(), label.factors.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            columns.emplace_back(name, label);
            body += mono;
            ++next_c;
        }
        ansatz.emplace(name, body);
    }
    sol.monomial_count = next_c;
    sol.cols = next_c;

    // substitute, split over everything but the coefficients, extract rows
    std::set<std::string> unpinned;
    for (const auto& f : p.freepars)
        if (!p.assumptions.count(f)) unpinned.insert(f);
    std::map<Atom, Expr> pins = assumption_map(p);
    std::set<std::string> arbitrary_kernels; // independent coordinates while splitting
    for (const auto& name : p.symbols->kernel_names())
        if (!ansatz.count(name)) arbitrary_kernels.insert(name);

    QMat rows;
    for (const auto& eq : ds.equations) {
        Expr e = substitute_bindings(eq.expr, ansatz).substitute(pins);
        std::set<Atom> vars;
        bool has_free_kernel = false;
        std::string free_kernel_name;
        for (const Atom& a : e.atoms()) {
            if (is_coefficient(a)) continue;
            if (a.kind == AtomKind::Symbol && unpinned.count(a.name)) continue;
            if ((a.kind == AtomKind::Kernel || a.kind == AtomKind::KernelDeriv) &&
                unpinned.count(a.kernel->name)) {
                has_free_kernel = true;
                free_kernel_name = a.kernel->name;
                continue;
            }
            vars.insert(a);
        }
        if (has_free_kernel)
            throw Error("arbitrary function '" + free_kernel_name +
                        "' from 'freepars' appears in the determining system; the "
                        "polynomial ansatz cannot branch on it (use verification mode)");
        for (auto& [mono, coeff] : collect_coefficients(e, vars, arbitrary_kernels)) {
            // each coefficient is linear homogeneous in the ansatz coefficients,
            // possibly times a power product of unpinned parameters
            QVec row(next_c, Rational(0));
            Monomial par_gcd;
            bool first = true;
            std::vector<std::pair<long, std::pair<Rational, Monomial>>> entries;
            if (coeff.has_denominator())
                throw Error("determining-system coefficient has a denominator: " +
                            coeff.str());
            for (const auto& t : coeff.num().terms()) {
                long col = -1;
                Monomial pars;
                for (const auto& [a, exp] : t.mono.factors) {
                    if (is_coefficient(a)) {
                        if (col >= 0 || exp != 1)
                            throw Error("determining system is not linear in the "
                                        "unknown infinitesimals");
                        col = std::stol(a.name.substr(2));
                    } else {
                        pars.factors.emplace_back(a, exp);
                    }
                }
                if (col < 0)
                    throw Error("inhomogeneous determining equation: " + coeff.str());
                if (first) {
                    par_gcd = pars;
                    first = false;
                } else {
                    par_gcd = mono_gcd(par_gcd, pars);
                }
                entries.emplace_back(col, std::make_pair(t.coeff, pars));
            }
            bool bad_par = false;
            std::string bad_name;
            for (auto& [col, cm] : entries) {
                auto rest = mono_div(cm.second, par_gcd);
                if (!rest || !rest->is_unit()) {
                    bad_par = true;
                    if (rest && !rest->factors.empty())
                        bad_name = rest->factors[0].first.str();
                }
                row[col] += cm.first;
            }
            if (bad_par)
                throw Error("parameter '" + bad_name +
                            "' appears in the determining system; pin it with "
                            "'assume " + bad_name + " = <value>'");
            // a common parameter factor is nonzero only if declared so
            for (const auto& [a, exp] : par_gcd.factors) {
                bool nz = false;
                for (const auto& nzp : p.nonzeropars)
                    if (a.kind == AtomKind::Symbol && a.name == nzp) nz = true;
                if (!nz)
                    throw Error("parameter '" + a.str() + "' multiplies a determining "
                                "equation; add it to 'nonzeropars' or pin its value");
            }
            rows.push_back(std::move(row));
        }
    }
    sol.rows = static_cast<long>(rows.size());

    std::vector<QVec> null_basis = q_nullspace(rows, next_c);
    sol.nullity = static_cast<long>(null_basis.size());

    // map coefficient vectors back to kernel bindings and generator fields
    VectorField generic = make_generic_generator(p);
    for (size_t b = 0; b < null_basis.size(); ++b) {
        std::map<std::string, Expr> bindings;
        for (const auto& name : ds.unknowns) bindings.emplace(name, Expr::zero());
        for (size_t c = 0; c < columns.size(); ++c) {
            if (sgn(null_basis[b][c]) == 0) continue;
            Expr mono(null_basis[b][c]);
            for (const auto& [a, exp] : columns[c].second.factors)
                mono = mono * Expr(a).pow(exp);
            bindings[columns[c].first] += mono;
        }
        VectorField field;
        field.flavor = generic.flavor;
        field.bindings = bindings;
        field.unknowns = ds.unknowns;
        for (const Expr& comp : generic.components)
            field.components.push_back(substitute_bindings(comp, bindings));
        for (const Expr& phi : generic.phis)
            field.phis.push_back(substitute_bindings(phi, bindings));
        if (generic.omega) field.omega = substitute_bindings(*generic.omega, bindings);
        sol.basis.push_back(std::move(field));
        sol.parameters.push_back("k_" + std::to_string(b + 1));
    }

    // soundness: every basis field must leave zero residuals
    auto reports = verify(sol.basis, ds, p);
    for (const auto& r : reports)
        if (!r.all_zero)
            throw Error("internal error: ansatz solution fails verification");
    return sol;
}

Expr apply_rewrite_rules(const Expr& e, const RewriteRules& rules) {
    if (rules.empty()) return e;
    Expr cur = e;
    for (int pass = 0; pass < 16; ++pass) {
        std::map<Atom, Expr> map;
        for (const Atom& a : cur.atoms()) {
            for (const auto& [lhs, rhs] : rules) {
                if (a == lhs) {
                    map.emplace(a, rhs);
                    break;
                }
                // a rule for df(f, M) rewrites df(f, M + extra) as well
                if (lhs.kind == AtomKind::KernelDeriv && a.kind == AtomKind::KernelDeriv &&
                    lhs.kernel->name == a.kernel->name) {
                    std::vector<Atom> extra;
                    auto la = lhs.dvars.begin();
                    bool subset = true;
                    for (const Atom& v : a.dvars) {
                        if (la != lhs.dvars.end() && v == *la) ++la;
                        else extra.push_back(v);
                    }
                    subset = la == lhs.dvars.end();
                    if (subset && !extra.empty()) {
                        Expr d = rhs;
                        for (const Atom& v : extra) d = d.diff(v);
                        map.emplace(a, d);
                        break;
                    }
                }
            }
        }
        if (map.empty()) return cur;
        cur = cur.substitute(map);
    }
    return cur;
}

std::map<std::string, Expr> derive_bindings(const VectorField& field, const Problem& p) {
    if (!field.bindings.empty()) return field.bindings;
    std::map<std::string, Expr> out;
    SymbolTable& st = *p.symbols;

    if (p.contact) {
        if (field.components.size() < static_cast<size_t>(p.n()) + 1)
            throw Error("contact field needs at least xi and eta components");
        Expr omega = field.omega ? *field.omega : [&] {
            Expr w = field.components[p.n()];
            for (int i = 0; i < p.n(); ++i)
                w += Expr(st.jet(0, {i})) * field.components[i];
            return w;
        }();
        // consistency with the characteristic relations
        for (int i = 0; i < p.n(); ++i) {
            Expr xi_i = -omega.diff(st.jet(0, {i}));
            if (!xi_i.equals(field.components[i]))
                throw Error("components do not satisfy the contact relations "
                            "(xi != -dOmega/du_" + p.xvar[i] + ")");
            if (field.components.size() == static_cast<size_t>(2 * p.n()) + 1) {
                Expr eta_i = omega.diff(p.x_atom(i)) +
                             Expr(st.jet(0, {i})) * omega.diff(st.jet(0, {}));
                if (!eta_i.equals(field.components[p.n() + 1 + i]))
                    throw Error("first-order components do not satisfy the contact "
                                "relations");
            }
        }
        out.emplace("omega", omega);
        return out;
    }

    if (p.approximate_mode()) {
        if (p.approxorder > 1)
            throw Error("give per-kernel bindings (xi0_..., xi1_...) to verify "
                        "approximate fields beyond first order");
        EpsilonTruncation scope(p.approxorder);
        auto levels = [&](const std::string& fam, const Expr& comp) {
            Expr l0 = epsilon_coefficient(comp, 0);
            Expr l1 = epsilon_coefficient(comp, 1);
            for (int beta = 0; beta < p.m(); ++beta)
                l1 -= l0.diff(st.jet(beta, {}, 0)) * Expr(st.jet(beta, {}, 1));
            auto us = fam.find('_');
            std::string n0 = fam, n1 = fam;
            n0.insert(us, "0");
            n1.insert(us, "1");
            out.emplace(n0, l0);
            out.emplace(n1, l1);
        };
        for (int i = 0; i < p.n(); ++i) {
            if (p.nonclassical > 0 && i + 1 <= p.nonclassical) continue;
            levels("xi_" + p.xvar[i], field.components.at(i));
        }
        for (int a = 0; a < p.m(); ++a)
            levels("eta_" + p.uvar[a], field.components.at(p.n() + a));
        if (p.variational)
            for (int i = 0; i < p.n(); ++i)
                levels("phi_" + p.xvar[i], field.phis.at(i));
        return out;
    }

    for (int i = 0; i < p.n(); ++i) {
        if (p.nonclassical == i + 1) {
            if (!field.components.at(i).equals(Expr::one()))
                throw Error("nonclassical normalization requires xi_" + p.xvar[i] +
                            " = 1");
            continue;
        }
        if (p.nonclassical > 0 && i + 1 < p.nonclassical) {
            if (!field.components.at(i).is_zero())
                throw Error("nonclassical normalization requires xi_" + p.xvar[i] +
                            " = 0");
            continue;
        }
        out.emplace("xi_" + p.xvar[i], field.components.at(i));
    }
    for (int a = 0; a < p.m(); ++a)
        out.emplace("eta_" + p.uvar[a], field.components.at(p.n() + a));
    for (size_t j = 0; j < p.arbelem.size(); ++j)
        out.emplace("mu_" + p.arbelem[j], field.components.at(p.n() + p.m() + j));
    if (p.variational)
        for (int i = 0; i < p.n(); ++i)
            if (static_cast<size_t>(i) < field.phis.size())
                out.emplace("phi_" + p.xvar[i], field.phis.at(i));
    return out;
}

std::vector<ResidualReport> verify(const std::vector<VectorField>& fields,
                                   const DeterminingSystem& ds, const Problem& p,
                                   const RewriteRules& constraints) {
    std::optional<EpsilonTruncation> scope;
    if (p.approximate_mode()) scope.emplace(p.approxorder);
    std::map<Atom, Expr> pins = assumption_map(p);
    std::vector<ResidualReport> out;
    for (size_t f = 0; f < fields.size(); ++f) {
        std::map<std::string, Expr> bindings = derive_bindings(fields[f], p);
        for (const auto& name : ds.unknowns)
            if (!bindings.count(name)) bindings.emplace(name, Expr::zero());
        ResidualReport rep;
        rep.field_index = f;
        for (const auto& eq : ds.equations) {
            Expr r = substitute_bindings(eq.expr, bindings).substitute(pins);
            bool conditional = false;
            if (!r.is_zero() && !constraints.empty()) {
                Expr rewritten = apply_rewrite_rules(r, constraints);
                conditional = rewritten.is_zero();
                r = rewritten;
            }
            if (!r.is_zero()) rep.all_zero = false;
            rep.residuals.push_back({eq.eps_order, canonicalize(r), conditional});
        }
        out.push_back(std::move(rep));
    }
    return out;
}

// ---------------------------------------------------------------------------
// linear independence over Q

QMat field_coefficient_matrix(const std::vector<VectorField>& fields) {
    std::map<std::pair<size_t, Monomial>, size_t> index;
    for (const auto& f : fields) {
        for (size_t c = 0; c < f.components.size(); ++c) {
            if (f.components[c].has_denominator())
                throw Error("coefficient matrix needs polynomial components");
            for (const auto& t : f.components[c].num().terms())
                index.emplace(std::make_pair(c, t.mono), index.size());
        }
    }
    QMat m(fields.size(), QVec(index.size(), Rational(0)));
    for (size_t r = 0; r < fields.size(); ++r)
        for (size_t c = 0; c < fields[r].components.size(); ++c)
            for (const auto& t : fields[r].components[c].num().terms())
                m[r][index.at({c, t.mono})] = t.coeff;
    return m;
}

QMat field_coefficient_matrix2(const std::vector<VectorField>& a,
                               const std::vector<VectorField>& b, QMat& bm) {
    std::vector<VectorField> all = a;
    all.insert(all.end(), b.begin(), b.end());
    QMat m = field_coefficient_matrix(all);
    bm.assign(m.begin() + a.size(), m.end());
    m.resize(a.size());
    return m;
}

EssentialResult essential_generators(const std::vector<VectorField>& fields) {
    EssentialResult res;
    QMat all = field_coefficient_matrix(fields);
    QMat kept;
    for (size_t i = 0; i < fields.size(); ++i) {
        QMat trial = kept;
        trial.push_back(all[i]);
        if (q_rank(trial) > static_cast<int>(kept.size())) {
            kept.push_back(all[i]);
            res.kept.push_back(i);
        } else {
            auto cert = q_express(kept, all[i]);
            if (!cert) throw Error("internal error: dependent field without certificate");
            res.certificates.emplace(i, *cert);
        }
    }
    return res;
}

} // namespace liesym
