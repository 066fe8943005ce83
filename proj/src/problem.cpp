#include "liesym/problem.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "liesym/parser.hpp"

namespace liesym {

std::vector<std::vector<int>> multisets_of_order(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    // sorted k-multisets over [0,n)
    auto rec = [&](auto&& self, int start, int left) -> void {
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i < n; ++i) {
            cur.push_back(i);
            self(self, i, left - 1);
            cur.pop_back();
        }
    };
    rec(rec, 0, k);
    return out;
}

std::vector<Atom> Problem::jet_coordinates(int max_order, int pert) const {
    std::vector<Atom> out;
    for (int k = 0; k <= max_order; ++k) {
        for (int alpha = 0; alpha < m(); ++alpha) {
            for (auto& idx : multisets_of_order(n(), k))
                out.push_back(symbols->jet(alpha, idx, pert));
        }
    }
    return out;
}

std::vector<Atom> Problem::z_coordinates() const {
    std::vector<Atom> out;
    for (int i = 0; i < n(); ++i) out.push_back(x_atom(i));
    for (int k = 0; k <= zorder; ++k)
        for (int alpha = 0; alpha < m(); ++alpha)
            for (auto& idx : multisets_of_order(n(), k))
                out.push_back(symbols->jet(alpha, idx));
    return out;
}

// ---------------------------------------------------------------------------
// total derivatives

namespace {

// jets the chain rule has to run over: those occurring in e plus the jet
// dependencies of any kernel occurring in e
std::vector<Atom> chain_jets(const Expr& e) {
    std::set<Atom> jets;
    for (const Atom& a : e.atoms()) {
        if (a.kind == AtomKind::Jet) jets.insert(a);
        if (a.kind == AtomKind::Kernel || a.kind == AtomKind::KernelDeriv) {
            for (const Atom& d : a.kernel->deps)
                if (d.kind == AtomKind::Jet) jets.insert(d);
        }
    }
    return {jets.begin(), jets.end()};
}

// kernels referenced as dependencies of other kernels in e (arbitrary
// elements under general equivalence transformations)
std::vector<Atom> chain_kernels(const Expr& e) {
    std::set<Atom> out;
    for (const Atom& a : e.atoms()) {
        if (a.kind == AtomKind::Kernel || a.kind == AtomKind::KernelDeriv) {
            for (const Atom& d : a.kernel->deps)
                if (d.kind == AtomKind::Kernel) out.insert(d);
        }
    }
    return {out.begin(), out.end()};
}

Expr total_derivative_impl(const Expr& e, int i, const Problem& p, int order_cap) {
    if (i < 0 || i >= p.n()) throw Error("independent-variable index out of range");
    Expr out = e.diff(p.x_atom(i));
    for (const Atom& v : chain_jets(e)) {
        Expr dv = e.diff(v);
        if (dv.is_zero()) continue;
        if (order_cap >= 0 && v.jet_order() + 1 > order_cap)
            throw Error("total derivative of " + v.str() + " leaves the order-" +
                        std::to_string(order_cap) + " jet space");
        out += Expr(p.symbols->jet_extend(v, i)) * dv;
    }
    for (const Atom& q : chain_kernels(e)) {
        Expr dq = e.diff(q);
        if (dq.is_zero()) continue;
        out += total_derivative_impl(Expr(q), i, p, order_cap) * dq;
    }
    return out;
}

} // namespace

Expr total_derivative(const Expr& e, int i, const Problem& p) {
    return total_derivative_impl(e, i, p, p.jetorder);
}

Expr total_derivative_unbounded(const Expr& e, int i, const Problem& p) {
    return total_derivative_impl(e, i, p, -1);
}

Expr total_derivative_equiv(const Expr& e, int beta, const Problem& p) {
    if (!p.equivalence_mode())
        throw Error("equivalence Lie derivative without arbitrary elements");
    std::vector<Atom> z = p.z_coordinates();
    if (beta < 0 || beta >= static_cast<int>(z.size()))
        throw Error("argument index out of range for the arbitrary elements");
    const Atom& zb = z[beta];
    std::set<std::string> frozen = p.arbelem_names();
    Expr out = diff_partial_frozen(e, zb, frozen);
    // chain over the arbitrary-element coordinates present in e
    for (const Atom& a : e.atoms()) {
        bool is_p_coord = (a.kind == AtomKind::Kernel || a.kind == AtomKind::KernelDeriv) &&
                          frozen.count(a.kernel->name);
        if (!is_p_coord) continue;
        bool declared = false;
        for (const Atom& d : a.kernel->deps)
            if (d == zb) declared = true;
        if (!declared) continue; // the element does not depend on z_beta
        Expr da = diff_partial_frozen(e, a, frozen);
        if (da.is_zero()) continue;
        std::vector<Atom> dv = a.dvars;
        dv.push_back(zb);
        out += Expr(Atom::kernel_deriv(a.kernel, std::move(dv))) * da;
    }
    return out;
}

Expr expand_dependent(const Expr& e, const Problem& p) {
    if (!p.approximate_mode()) return e;
    std::map<Atom, Expr> map;
    Expr eps(Atom::symbol("epsilon"));
    for (const Atom& a : e.atoms()) {
        if (a.kind != AtomKind::Jet || a.jet->pert >= 0) continue;
        Expr sum = Expr::zero();
        for (int k = 0; k <= p.approxorder; ++k)
            sum += eps.pow(k) * Expr(p.symbols->jet(a.jet->dep_index, a.jet->index, k));
        map.emplace(a, sum);
    }
    return e.substitute(map);
}

// ---------------------------------------------------------------------------
// problem files

namespace {

struct RawEntry {
    std::string key;
    std::string value;
    int line;
};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// top-level comma split, respecting parentheses
std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    while (!out.empty() && out.back().empty()) out.pop_back();
    for (const auto& item : out)
        if (item.empty()) throw Error("empty entry in list '" + s + "'");
    return out;
}

int parse_int(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw Error("value of '" + key + "' must be an integer (got '" + s + "')");
    }
}

const std::set<std::string> kKnownKeys = {
    "jetorder",  "xvar",     "uvar",        "diffeqs",      "leadders",
    "nonclassical", "qcond", "contact",     "variational",  "lagrangian",
    "approxorder", "arbelem", "arborder",   "zorder",       "generalequiv",
    "nonpolyders", "freepars", "nonzeropars"};

} // namespace

Problem load_problem(const std::string& text) {
    std::vector<RawEntry> entries;
    std::vector<std::pair<std::string, std::string>> depends; // name -> list
    std::vector<std::pair<std::string, std::string>> assumes; // name -> expr

    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        std::string pending;
        int pending_line = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (!pending.empty()) {
                line = pending + " " + line;
                lineno = pending_line;
                pending.clear();
            }
            if (line.empty()) continue;
            if (line.back() == '\\') {
                pending = trim(line.substr(0, line.size() - 1));
                pending_line = lineno;
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw Error("line " + std::to_string(lineno) + ": expected 'key = value'");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.rfind("depend ", 0) == 0) {
                depends.emplace_back(trim(key.substr(7)), value);
            } else if (key.rfind("assume ", 0) == 0) {
                assumes.emplace_back(trim(key.substr(7)), value);
            } else if (kKnownKeys.count(key)) {
                entries.push_back({key, value, lineno});
            } else {
                throw Error("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            }
        }
        if (!pending.empty()) throw Error("dangling line continuation at end of file");
    }

    auto find = [&](const std::string& key) -> const RawEntry* {
        for (const auto& e : entries)
            if (e.key == key) return &e;
        return nullptr;
    };
    for (size_t i = 0; i < entries.size(); ++i)
        for (size_t j = i + 1; j < entries.size(); ++j)
            if (entries[i].key == entries[j].key)
                throw Error("key '" + entries[i].key + "' given twice");

    Problem p;
    const RawEntry* e;

    if (!(e = find("jetorder"))) throw Error("mandatory key 'jetorder' is missing");
    p.jetorder = parse_int(e->value, "jetorder");
    if (p.jetorder < 1) throw Error("'jetorder' must be positive");
    if (!(e = find("xvar"))) throw Error("mandatory key 'xvar' is missing");
    p.xvar = split_list(e->value);
    if (!(e = find("uvar"))) throw Error("mandatory key 'uvar' is missing");
    p.uvar = split_list(e->value);
    if ((e = find("approxorder"))) {
        p.approxorder = parse_int(e->value, "approxorder");
        if (p.approxorder < 0) throw Error("'approxorder' must be >= 0");
    }
    if ((e = find("nonclassical"))) p.nonclassical = parse_int(e->value, "nonclassical");
    if ((e = find("contact"))) p.contact = parse_int(e->value, "contact") != 0;
    if ((e = find("variational"))) p.variational = parse_int(e->value, "variational") != 0;
    if ((e = find("generalequiv"))) p.generalequiv = parse_int(e->value, "generalequiv") != 0;
    if ((e = find("arborder"))) p.arborder = parse_int(e->value, "arborder");
    if ((e = find("zorder"))) p.zorder = parse_int(e->value, "zorder");
    if ((e = find("arbelem"))) p.arbelem = split_list(e->value);
    if ((e = find("freepars"))) p.freepars = split_list(e->value);
    if ((e = find("nonzeropars"))) p.nonzeropars = split_list(e->value);
    if ((e = find("qcond"))) {
        for (const auto& s : split_list(e->value)) p.qcond.push_back(parse_int(s, "qcond"));
    }

    p.symbols = std::make_shared<SymbolTable>();
    p.symbols->set_variables(p.xvar, p.uvar, p.approxorder);
    SymbolTable& st = *p.symbols;

    // declared dependencies come first so later expressions can use them
    std::map<std::string, std::vector<Atom>> declared_deps;
    for (const auto& [name, list] : depends) {
        std::vector<Atom> deps;
        for (const auto& v : split_list(list)) deps.push_back(st.resolve(v));
        declared_deps.emplace(name, deps);
    }

    // arbitrary elements depend on z unless the user restricted them
    if (p.equivalence_mode()) {
        if (p.approximate_mode())
            throw Error("approximate equivalence transformations are not supported");
        if (p.arborder < 0)
            throw Error("'arbelem' requires 'arborder' >= 0");
        if (p.zorder > p.jetorder) throw Error("'zorder' cannot exceed 'jetorder'");
        std::vector<Atom> z = p.z_coordinates();
        for (const auto& name : p.arbelem) {
            auto it = declared_deps.find(name);
            if (it != declared_deps.end()) {
                st.register_kernel(name, it->second);
                declared_deps.erase(it);
            } else {
                st.register_kernel(name, z);
            }
        }
    } else {
        if (p.arborder > 0 || find("zorder") || p.generalequiv)
            p.warnings.push_back("equivalence-mode keys ignored: 'arbelem' is empty");
    }

    for (const auto& [name, deps] : declared_deps) st.register_kernel(name, deps);
    for (const auto& name : p.freepars)
        if (!st.has_kernel(name) && !st.has_symbol(name)) st.register_symbol(name);
    for (const auto& name : p.nonzeropars)
        if (!st.has_kernel(name) && !st.has_symbol(name)) st.register_symbol(name);

    for (const auto& [name, value] : assumes) {
        if (std::find(p.freepars.begin(), p.freepars.end(), name) == p.freepars.end())
            throw Error("'assume " + name + "' pins a parameter not listed in 'freepars'");
        p.assumptions.emplace(name, parse(value, st));
    }

    {
        std::optional<EpsilonTruncation> scope;
        if (p.approximate_mode()) scope.emplace(p.approxorder);
        if ((e = find("diffeqs")))
            for (const auto& s : split_list(e->value)) p.diffeqs.push_back(parse(s, st));
        if ((e = find("lagrangian"))) {
            auto items = split_list(e->value);
            if (items.size() != 1) throw Error("'lagrangian' must hold exactly one expression");
            p.lagrangian = parse(items[0], st);
        }
        if ((e = find("leadders"))) {
            for (const auto& s : split_list(e->value)) {
                Expr le = parse(s, st);
                const auto& terms = le.num().terms();
                if (le.has_denominator() || terms.size() != 1 || terms[0].coeff != 1 ||
                    terms[0].mono.factors.size() != 1 || terms[0].mono.factors[0].second != 1)
                    throw Error("leading derivative '" + s + "' must be a single coordinate");
                const Atom& a = terms[0].mono.factors[0].first;
                if (a.kind != AtomKind::Jet && a.kind != AtomKind::KernelDeriv)
                    throw Error("leading derivative '" + s +
                                "' must be a derivative coordinate");
                p.leadders.push_back(a);
            }
        }
        if ((e = find("nonpolyders"))) {
            for (const auto& s : split_list(e->value)) {
                Expr le = parse(s, st);
                const auto& terms = le.num().terms();
                if (terms.size() != 1 || terms[0].mono.factors.size() != 1)
                    throw Error("nonpolyders entry '" + s + "' must be a single derivative");
                p.nonpolyders.push_back(terms[0].mono.factors[0].first);
            }
        }
    }

    // validation mirroring the initialization checks
    if (p.variational) {
        if (!p.lagrangian) throw Error("'variational = 1' requires a 'lagrangian'");
        if (!p.diffeqs.empty() || !p.leadders.empty())
            p.warnings.push_back("variational mode: 'diffeqs'/'leadders' are ignored; the "
                                 "Euler-Lagrange equations are derived from the lagrangian");
    } else if (p.diffeqs.empty() && p.leadders.empty()) {
        p.warnings.push_back("list 'diffeqs' of differential equation(s) is missing");
        p.warnings.push_back("list 'leadders' of leading derivative(s) is missing");
        p.warnings.push_back("only prolongation and algebra operations are available");
    } else if (p.diffeqs.size() != p.leadders.size()) {
        throw Error("'diffeqs' and 'leadders' must have the same length (got " +
                    std::to_string(p.diffeqs.size()) + " equation(s), " +
                    std::to_string(p.leadders.size()) + " leading derivative(s))");
    }
    if (p.contact && p.m() != 1)
        throw Error("contact symmetries require exactly one dependent variable");
    if (p.nonclassical < 0 || p.nonclassical > p.n())
        throw Error("'nonclassical' must lie in 0.." + std::to_string(p.n()));
    for (int q : p.qcond)
        if (q < 1 || q > p.m())
            throw Error("'qcond' entries must lie in 1.." + std::to_string(p.m()));
    {
        std::set<int> qs(p.qcond.begin(), p.qcond.end());
        if (qs.size() != p.qcond.size()) throw Error("'qcond' entries must be distinct");
    }
    if (p.nonclassical > 0 && p.qcond.empty())
        for (int a = 1; a <= p.m(); ++a) p.qcond.push_back(a);
    for (const Atom& l : p.leadders) {
        if (l.kind == AtomKind::Jet && l.jet_order() > p.jetorder)
            throw Error("leading derivative " + l.str() + " exceeds 'jetorder'");
    }
    for (const Expr& d : p.diffeqs)
        for (const Atom& a : d.atoms())
            if (a.kind == AtomKind::Jet && a.jet_order() > p.jetorder)
                throw Error("equation contains " + a.str() + " beyond 'jetorder'");
    if (p.lagrangian)
        for (const Atom& a : p.lagrangian->atoms())
            if (a.kind == AtomKind::Jet && a.jet_order() > p.jetorder)
                throw Error("lagrangian contains " + a.str() + " beyond 'jetorder'");

    return p;
}

} // namespace liesym
