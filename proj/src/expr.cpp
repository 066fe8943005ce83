#include "liesym/expr.hpp"

#include <algorithm>
#include <sstream>

namespace liesym {

namespace {
thread_local int g_epsilon_truncation = -1;
} // namespace

EpsilonTruncation::EpsilonTruncation(int order) : previous_(g_epsilon_truncation) {
    g_epsilon_truncation = order;
}
EpsilonTruncation::~EpsilonTruncation() { g_epsilon_truncation = previous_; }
int EpsilonTruncation::current() { return g_epsilon_truncation; }

Rational rat(long num, long den) {
    if (den == 0) throw Error("rational with zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

std::string rat_str(const Rational& q) { return q.get_str(); }

// ---------------------------------------------------------------------------
// Atom

Atom Atom::symbol(std::string name) {
    Atom a;
    a.kind = AtomKind::Symbol;
    a.name = std::move(name);
    return a;
}

Atom Atom::jet_var(JetPtr data) {
    Atom a;
    a.kind = AtomKind::Jet;
    a.jet = std::move(data);
    a.name = a.jet->canonical_name();
    return a;
}

Atom Atom::kernel_ref(KernelPtr data) {
    Atom a;
    a.kind = AtomKind::Kernel;
    a.kernel = std::move(data);
    a.name = a.kernel->name;
    return a;
}

Atom Atom::kernel_deriv(KernelPtr data, std::vector<Atom> dvars) {
    if (dvars.empty()) return kernel_ref(std::move(data));
    std::sort(dvars.begin(), dvars.end());
    Atom a;
    a.kind = AtomKind::KernelDeriv;
    a.kernel = std::move(data);
    a.name = a.kernel->name;
    a.dvars = std::move(dvars);
    return a;
}

Atom Atom::unary(std::string op, const Expr& argument) {
    Atom a;
    a.kind = AtomKind::Unary;
    a.name = std::move(op);
    a.arg = std::make_shared<Expr>(argument);
    return a;
}

bool Atom::depends_on(const Atom& v) const {
    if (kind != AtomKind::Kernel && kind != AtomKind::KernelDeriv) return false;
    for (const Atom& d : kernel->deps)
        if (d == v) return true;
    return false;
}

std::string JetData::canonical_name() const {
    std::string s = dep;
    if (pert >= 0) s += std::to_string(pert);
    if (!index.empty()) {
        s += "_";
        for (const auto& n : index_names) s += n;
    }
    return s;
}

namespace {
int compare_int_vecs(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

int compare_expr_structural(const Expr& a, const Expr& b);

int compare_poly_structural(const Poly& a, const Poly& b) {
    const auto& ta = a.terms();
    const auto& tb = b.terms();
    if (ta.size() != tb.size()) return ta.size() < tb.size() ? -1 : 1;
    for (size_t i = 0; i < ta.size(); ++i) {
        int c = compare_grlex(ta[i].mono, tb[i].mono);
        if (c != 0) return c;
        int s = cmp(ta[i].coeff, tb[i].coeff);
        if (s != 0) return s < 0 ? -1 : 1;
    }
    return 0;
}

int compare_expr_structural(const Expr& a, const Expr& b) {
    int c = compare_poly_structural(a.num(), b.num());
    if (c != 0) return c;
    return compare_poly_structural(a.den(), b.den());
}
} // namespace

int compare(const Atom& a, const Atom& b) {
    if (a.kind != b.kind)
        return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
    switch (a.kind) {
    case AtomKind::Symbol:
        return a.name.compare(b.name) < 0 ? -1 : (a.name == b.name ? 0 : 1);
    case AtomKind::Jet: {
        if (a.jet->pert != b.jet->pert) return a.jet->pert < b.jet->pert ? -1 : 1;
        int oa = a.jet_order(), ob = b.jet_order();
        if (oa != ob) return oa < ob ? -1 : 1;
        if (a.jet->dep_index != b.jet->dep_index)
            return a.jet->dep_index < b.jet->dep_index ? -1 : 1;
        int c = compare_int_vecs(a.jet->index, b.jet->index);
        if (c != 0) return c;
        // distinct problems may reuse indices with different names
        return a.name.compare(b.name) < 0 ? -1 : (a.name == b.name ? 0 : 1);
    }
    case AtomKind::Kernel:
        return a.name.compare(b.name) < 0 ? -1 : (a.name == b.name ? 0 : 1);
    case AtomKind::KernelDeriv: {
        int c = a.name.compare(b.name);
        if (c != 0) return c < 0 ? -1 : 1;
        if (a.dvars.size() != b.dvars.size())
            return a.dvars.size() < b.dvars.size() ? -1 : 1;
        for (size_t i = 0; i < a.dvars.size(); ++i) {
            c = compare(a.dvars[i], b.dvars[i]);
            if (c != 0) return c;
        }
        return 0;
    }
    case AtomKind::Unary: {
        int c = a.name.compare(b.name);
        if (c != 0) return c < 0 ? -1 : 1;
        return compare_expr_structural(*a.arg, *b.arg);
    }
    }
    return 0;
}

std::string Atom::str() const {
    switch (kind) {
    case AtomKind::Symbol:
    case AtomKind::Jet:
    case AtomKind::Kernel:
        return name;
    case AtomKind::KernelDeriv: {
        std::string s = "df(" + name;
        size_t i = 0;
        while (i < dvars.size()) {
            size_t j = i;
            while (j < dvars.size() && dvars[j] == dvars[i]) ++j;
            s += "," + dvars[i].str();
            if (j - i > 1) s += "," + std::to_string(j - i);
            i = j;
        }
        return s + ")";
    }
    case AtomKind::Unary:
        return name + "(" + arg->str() + ")";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Monomial

int Monomial::degree() const {
    int d = 0;
    for (const auto& [a, e] : factors) d += e;
    return d;
}

int Monomial::exponent(const Atom& a) const {
    for (const auto& [b, e] : factors)
        if (b == a) return e;
    return 0;
}

int Monomial::epsilon_exponent() const {
    for (const auto& [a, e] : factors)
        if (a.is_epsilon()) return e;
    return 0;
}

std::string Monomial::str() const {
    std::string s;
    for (const auto& [a, e] : factors) {
        if (!s.empty()) s += "*";
        s += a.str();
        if (e != 1) s += "^" + std::to_string(e);
    }
    return s.empty() ? "1" : s;
}

int compare_grlex(const Monomial& a, const Monomial& b) {
    int da = a.degree(), db = b.degree();
    if (da != db) return da < db ? -1 : 1;
    // lexicographic: the earliest atom where exponents differ decides.
    size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        int c = compare(a.factors[i].first, b.factors[j].first);
        if (c < 0) return 1;  // a has the earlier atom with positive exponent
        if (c > 0) return -1;
        if (a.factors[i].second != b.factors[j].second)
            return a.factors[i].second > b.factors[j].second ? 1 : -1;
        ++i;
        ++j;
    }
    if (i < a.factors.size()) return 1;
    if (j < b.factors.size()) return -1;
    return 0;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.factors.reserve(a.factors.size() + b.factors.size());
    size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        int c = compare(a.factors[i].first, b.factors[j].first);
        if (c < 0) {
            r.factors.push_back(a.factors[i++]);
        } else if (c > 0) {
            r.factors.push_back(b.factors[j++]);
        } else {
            r.factors.emplace_back(a.factors[i].first,
                                   a.factors[i].second + b.factors[j].second);
            ++i;
            ++j;
        }
    }
    while (i < a.factors.size()) r.factors.push_back(a.factors[i++]);
    while (j < b.factors.size()) r.factors.push_back(b.factors[j++]);
    return r;
}

std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b) {
    Monomial r;
    size_t i = 0;
    for (const auto& [atom, e] : b.factors) {
        while (i < a.factors.size() && compare(a.factors[i].first, atom) < 0)
            r.factors.push_back(a.factors[i++]);
        if (i == a.factors.size() || a.factors[i].first != atom) return std::nullopt;
        if (a.factors[i].second < e) return std::nullopt;
        if (a.factors[i].second > e)
            r.factors.emplace_back(atom, a.factors[i].second - e);
        ++i;
    }
    while (i < a.factors.size()) r.factors.push_back(a.factors[i++]);
    return r;
}

Monomial mono_gcd(const Monomial& a, const Monomial& b) {
    Monomial r;
    size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        int c = compare(a.factors[i].first, b.factors[j].first);
        if (c < 0) ++i;
        else if (c > 0) ++j;
        else {
            r.factors.emplace_back(a.factors[i].first,
                                   std::min(a.factors[i].second, b.factors[j].second));
            ++i;
            ++j;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Poly

Poly Poly::constant(const Rational& c) {
    Poly p;
    if (sgn(c) != 0) p.terms_.push_back({c, Monomial{}});
    return p;
}

Poly Poly::variable(const Atom& a) {
    Poly p;
    Monomial m;
    m.factors.emplace_back(a, 1);
    p.terms_.push_back({Rational(1), std::move(m)});
    return p;
}

bool Poly::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.is_unit());
}

bool Poly::is_one() const {
    return terms_.size() == 1 && terms_[0].mono.is_unit() && terms_[0].coeff == 1;
}

const Rational& Poly::leading_coeff() const {
    if (terms_.empty()) throw Error("leading_coeff of zero polynomial");
    return terms_[0].coeff;
}

const Monomial& Poly::leading_mono() const {
    if (terms_.empty()) throw Error("leading_mono of zero polynomial");
    return terms_[0].mono;
}

Poly Poly::from_terms(std::vector<PolyTerm> terms) {
    const int cap = EpsilonTruncation::current();
    std::sort(terms.begin(), terms.end(), [](const PolyTerm& a, const PolyTerm& b) {
        return compare_grlex(a.mono, b.mono) > 0;
    });
    Poly p;
    p.terms_.reserve(terms.size());
    for (auto& t : terms) {
        if (sgn(t.coeff) == 0) continue;
        if (cap >= 0 && t.mono.epsilon_exponent() > cap) continue;
        if (!p.terms_.empty() && compare_grlex(p.terms_.back().mono, t.mono) == 0) {
            p.terms_.back().coeff += t.coeff;
            if (sgn(p.terms_.back().coeff) == 0) p.terms_.pop_back();
        } else {
            p.terms_.push_back(std::move(t));
        }
    }
    return p;
}

Poly Poly::operator-() const {
    Poly p(*this);
    for (auto& t : p.terms_) t.coeff = -t.coeff;
    return p;
}

Poly operator+(const Poly& a, const Poly& b) {
    Poly r;
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    size_t i = 0, j = 0;
    while (i < a.terms_.size() && j < b.terms_.size()) {
        int c = compare_grlex(a.terms_[i].mono, b.terms_[j].mono);
        if (c > 0) {
            r.terms_.push_back(a.terms_[i++]);
        } else if (c < 0) {
            r.terms_.push_back(b.terms_[j++]);
        } else {
            Rational s = a.terms_[i].coeff + b.terms_[j].coeff;
            if (sgn(s) != 0) r.terms_.push_back({std::move(s), a.terms_[i].mono});
            ++i;
            ++j;
        }
    }
    while (i < a.terms_.size()) r.terms_.push_back(a.terms_[i++]);
    while (j < b.terms_.size()) r.terms_.push_back(b.terms_[j++]);
    return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    const int cap = EpsilonTruncation::current();
    std::vector<PolyTerm> terms;
    terms.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_) {
        for (const auto& tb : b.terms_) {
            Monomial m = mono_mul(ta.mono, tb.mono);
            if (cap >= 0 && m.epsilon_exponent() > cap) continue;
            terms.push_back({ta.coeff * tb.coeff, std::move(m)});
        }
    }
    return Poly::from_terms(std::move(terms));
}

Poly Poly::scaled(const Rational& c) const {
    if (sgn(c) == 0) return Poly();
    Poly p(*this);
    for (auto& t : p.terms_) t.coeff *= c;
    return p;
}

Poly Poly::pow(int e) const {
    if (e < 0) throw Error("Poly::pow with negative exponent");
    Poly r = Poly::constant(1);
    for (int i = 0; i < e; ++i) r = r * (*this);
    return r;
}

Rational Poly::signed_content() const {
    if (terms_.empty()) return Rational(1);
    mpz_class num_gcd = 0, den_lcm = 1;
    for (const auto& t : terms_) {
        mpz_class n = abs(t.coeff.get_num());
        mpz_class d = t.coeff.get_den();
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), n.get_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), d.get_mpz_t());
    }
    Rational c(num_gcd, den_lcm);
    c.canonicalize();
    if (sgn(terms_[0].coeff) < 0) c = -c;
    return c;
}

Poly Poly::divided_by_rational(const Rational& c) const {
    if (sgn(c) == 0) throw Error("division by zero rational");
    return scaled(1 / c);
}

std::set<Atom> Poly::atoms() const {
    std::set<Atom> out;
    for (const auto& t : terms_) {
        for (const auto& [a, e] : t.mono.factors) {
            out.insert(a);
            if (a.kind == AtomKind::Unary) {
                auto inner = a.arg->atoms();
                out.insert(inner.begin(), inner.end());
            }
        }
    }
    return out;
}

bool Poly::contains(const Atom& a) const {
    for (const auto& t : terms_) {
        for (const auto& [b, e] : t.mono.factors) {
            if (b == a) return true;
            if (b.kind == AtomKind::Unary && b.arg->contains(a)) return true;
        }
    }
    return false;
}

int Poly::degree_in(const Atom& a) const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.mono.exponent(a));
    return d;
}

std::string Poly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
        Rational c = t.coeff;
        if (first) {
            if (sgn(c) < 0) {
                os << "-";
                c = -c;
            }
        } else {
            os << (sgn(c) < 0 ? " - " : " + ");
            if (sgn(c) < 0) c = -c;
        }
        first = false;
        if (t.mono.is_unit()) {
            os << rat_str(c);
        } else if (c == 1) {
            os << t.mono.str();
        } else {
            os << rat_str(c) << "*" << t.mono.str();
        }
    }
    return os.str();
}

std::optional<Poly> divide_exact(const Poly& num, const Poly& den) {
    if (den.is_zero()) throw Error("divide_exact by zero polynomial");
    if (num.is_zero()) return Poly();
    if (den.is_constant()) return num.divided_by_rational(den.leading_coeff());
    Poly r = num;
    std::vector<PolyTerm> q;
    while (!r.is_zero()) {
        auto m = mono_div(r.leading_mono(), den.leading_mono());
        if (!m) return std::nullopt;
        PolyTerm t{r.leading_coeff() / den.leading_coeff(), *m};
        Poly tp;
        tp = Poly::from_terms({t});
        r = r - tp * den;
        q.push_back(std::move(t));
    }
    return Poly::from_terms(std::move(q));
}

// ---------------------------------------------------------------------------
// Expr

Expr::Expr(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
    normalize();
}

void Expr::normalize() {
    if (den_.is_zero()) throw Error("expression with zero denominator");
    if (num_.is_zero()) {
        den_ = Poly::constant(1);
        return;
    }
    // cancel the common monomial factor of every term
    Monomial g = num_.leading_mono();
    for (const auto& t : num_.terms()) g = mono_gcd(g, t.mono);
    for (const auto& t : den_.terms()) g = mono_gcd(g, t.mono);
    if (!g.is_unit()) {
        auto strip = [&g](const Poly& p) {
            std::vector<PolyTerm> ts;
            ts.reserve(p.terms().size());
            for (const auto& t : p.terms()) ts.push_back({t.coeff, *mono_div(t.mono, g)});
            return Poly::from_terms(std::move(ts));
        };
        num_ = strip(num_);
        den_ = strip(den_);
    }
    // make the denominator primitive with positive leading coefficient
    Rational c = den_.signed_content();
    if (c != 1) {
        den_ = den_.divided_by_rational(c);
        num_ = num_.divided_by_rational(c);
    }
    if (!den_.is_one()) {
        if (auto q = divide_exact(num_, den_)) {
            num_ = std::move(*q);
            den_ = Poly::constant(1);
        }
    }
}

Rational Expr::rational_value() const {
    if (!is_rational()) throw Error("expression is not a rational constant");
    return num_.is_zero() ? Rational(0) : num_.leading_coeff();
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (compare_poly_structural(a.den_, b.den_) == 0)
        return Expr(a.num_ + b.num_, a.den_);
    return Expr(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr Expr::operator-() const {
    Expr e(*this);
    e.num_ = -e.num_;
    return e;
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return Expr::zero();
    return Expr(a.num_ * b.num_, a.den_ * b.den_);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_zero()) throw Error("division by zero expression");
    if (a.is_zero()) return Expr::zero();
    return Expr(a.num_ * b.den_, a.den_ * b.num_);
}

Expr Expr::pow(int e) const {
    if (e == 0) return Expr::one();
    if (e < 0) return Expr::one() / pow(-e);
    Expr r = Expr::one();
    for (int i = 0; i < e; ++i) r = r * (*this);
    return r;
}

bool Expr::equals(const Expr& o) const {
    return (num_ * o.den_ - o.num_ * den_).is_zero();
}

namespace {

const std::set<std::string> kNoFrozen;

Expr derivative_of_atom(const Atom& a, const Atom& v, const std::set<std::string>& frozen);

Expr diff_poly(const Poly& p, const Atom& v, const std::set<std::string>& frozen) {
    Expr out = Expr::zero();
    for (const auto& t : p.terms()) {
        for (size_t k = 0; k < t.mono.factors.size(); ++k) {
            const auto& [atom, e] = t.mono.factors[k];
            Expr da = derivative_of_atom(atom, v, frozen);
            if (da.is_zero()) continue;
            // coeff * e * atom^(e-1) * (other factors) * da
            std::vector<PolyTerm> rest{{t.coeff * e, Monomial{}}};
            Monomial m;
            for (size_t j = 0; j < t.mono.factors.size(); ++j) {
                if (j == k) {
                    if (e > 1) m.factors.emplace_back(atom, e - 1);
                } else {
                    m.factors.push_back(t.mono.factors[j]);
                }
            }
            rest[0].mono = std::move(m);
            out += Expr(Poly::from_terms(std::move(rest)), Poly::constant(1)) * da;
        }
    }
    return out;
}

Expr derivative_of_atom(const Atom& a, const Atom& v, const std::set<std::string>& frozen) {
    if (a == v) return Expr::one();
    switch (a.kind) {
    case AtomKind::Symbol:
    case AtomKind::Jet:
        return Expr::zero();
    case AtomKind::Kernel:
        if (a.depends_on(v) && !frozen.count(a.kernel->name))
            return Expr(Atom::kernel_deriv(a.kernel, {v}));
        return Expr::zero();
    case AtomKind::KernelDeriv:
        if (a.depends_on(v) && !frozen.count(a.kernel->name)) {
            std::vector<Atom> dv = a.dvars;
            dv.push_back(v);
            return Expr(Atom::kernel_deriv(a.kernel, std::move(dv)));
        }
        return Expr::zero();
    case AtomKind::Unary: {
        Expr inner = diff_partial_frozen(*a.arg, v, frozen);
        if (inner.is_zero()) return Expr::zero();
        const Expr& x = *a.arg;
        Expr outer;
        if (a.name == "exp") outer = Expr(a);
        else if (a.name == "log") outer = Expr::one() / x;
        else if (a.name == "sin") outer = Expr(Atom::unary("cos", x));
        else if (a.name == "cos") outer = -Expr(Atom::unary("sin", x));
        else if (a.name == "tan") outer = Expr::one() + Expr(a) * Expr(a);
        else if (a.name == "sinh") outer = Expr(Atom::unary("cosh", x));
        else if (a.name == "cosh") outer = Expr(Atom::unary("sinh", x));
        else if (a.name == "tanh") outer = Expr::one() - Expr(a) * Expr(a);
        else throw Error("cannot differentiate unary operator '" + a.name + "'");
        return outer * inner;
    }
    }
    return Expr::zero();
}

} // namespace

Expr Expr::diff(const Atom& v) const { return diff_partial_frozen(*this, v, kNoFrozen); }

Expr diff_partial_frozen(const Expr& e, const Atom& v,
                         const std::set<std::string>& frozen_kernels) {
    Expr dn = diff_poly(e.num(), v, frozen_kernels);
    if (e.den().is_one()) return dn;
    Expr dd = diff_poly(e.den(), v, frozen_kernels);
    Expr den(e.den(), Poly::constant(1));
    return (dn * den - Expr(e.num(), Poly::constant(1)) * dd) / (den * den);
}

namespace {
Expr substitute_poly(const Poly& p, const std::map<Atom, Expr>& bindings) {
    Expr out = Expr::zero();
    for (const auto& t : p.terms()) {
        Expr term(t.coeff);
        for (const auto& [atom, e] : t.mono.factors) {
            auto it = bindings.find(atom);
            if (it != bindings.end()) {
                term = term * it->second.pow(e);
            } else if (atom.kind == AtomKind::Unary && !bindings.empty()) {
                Expr arg = atom.arg->substitute(bindings);
                Atom replaced = arg.equals(*atom.arg) ? atom : Atom::unary(atom.name, arg);
                term = term * Expr(replaced).pow(e);
            } else {
                term = term * Expr(atom).pow(e);
            }
            if (term.is_zero()) break;
        }
        out += term;
    }
    return out;
}
} // namespace

Expr Expr::substitute(const std::map<Atom, Expr>& bindings) const {
    if (bindings.empty()) return *this;
    Expr n = substitute_poly(num_, bindings);
    if (den_.is_one()) return n;
    Expr d = substitute_poly(den_, bindings);
    if (d.is_zero()) throw Error("substitution produces a zero denominator");
    return n / d;
}

std::set<Atom> Expr::atoms() const {
    std::set<Atom> out = num_.atoms();
    if (!den_.is_one()) {
        auto d = den_.atoms();
        out.insert(d.begin(), d.end());
    }
    return out;
}

bool Expr::contains(const Atom& a) const {
    return num_.contains(a) || (!den_.is_one() && den_.contains(a));
}

int Expr::degree_in(const Atom& a) const { return num_.degree_in(a); }

Expr Expr::normalized_sign_content() const {
    if (is_zero()) return *this;
    Rational c = num_.signed_content();
    Expr e(*this);
    e.num_ = e.num_.divided_by_rational(c);
    return e;
}

std::string Expr::str() const {
    if (den_.is_one()) {
        if (num_.terms().size() == 1) return num_.str();
        return num_.is_zero() ? "0" : num_.str();
    }
    std::string ds = den_.terms().size() == 1 && den_.leading_coeff() == 1 &&
                             den_.leading_mono().factors.size() == 1 &&
                             den_.leading_mono().factors[0].second == 1
                         ? den_.str()
                         : "(" + den_.str() + ")";
    return "(" + num_.str() + ")/" + ds;
}

Expr canonicalize(const Expr& e) {
    std::vector<PolyTerm> nt(e.num().terms().begin(), e.num().terms().end());
    std::vector<PolyTerm> dt(e.den().terms().begin(), e.den().terms().end());
    return Expr(Poly::from_terms(std::move(nt)), Poly::from_terms(std::move(dt)));
}

bool is_zero(const Expr& e) { return e.is_zero(); }

Expr diff_partial(const Expr& e, const Atom& v) { return e.diff(v); }

Expr substitute(const Expr& e, const std::map<Atom, Expr>& bindings) {
    return e.substitute(bindings);
}

namespace {
// a coefficient may not depend on a collected variable, either directly or
// through a kernel's declared dependency list
void check_coefficient_free(const Monomial& rest, const std::set<Atom>& vars,
                            const std::set<std::string>& independent_kernels) {
    for (const auto& [a, e] : rest.factors) {
        if (a.kind == AtomKind::Unary) {
            for (const Atom& v : vars)
                if (a.arg->contains(v))
                    throw Error("not polynomial in " + v.str() + ": " + a.str());
        }
        if ((a.kind == AtomKind::Kernel || a.kind == AtomKind::KernelDeriv) &&
            !independent_kernels.count(a.kernel->name)) {
            for (const Atom& v : vars)
                if (a.depends_on(v))
                    throw Error("coefficient depends on " + v.str() +
                                " through kernel " + a.kernel->name);
        }
    }
}
} // namespace

std::vector<std::pair<Monomial, Expr>> collect_coefficients(
    const Expr& e, const std::set<Atom>& vars,
    const std::set<std::string>& independent_kernels) {
    for (const Atom& v : vars)
        if (e.den().contains(v))
            throw Error("not polynomial in " + v.str() + ": denominator " + e.den().str());
    std::map<Monomial, Poly, std::less<Monomial>> groups;
    for (const auto& t : e.num().terms()) {
        Monomial key, rest;
        for (const auto& [a, exp] : t.mono.factors) {
            if (vars.count(a)) key.factors.emplace_back(a, exp);
            else rest.factors.emplace_back(a, exp);
        }
        check_coefficient_free(rest, vars, independent_kernels);
        groups[key] = groups[key] + Poly::from_terms({{t.coeff, rest}});
    }
    std::vector<std::pair<Monomial, Expr>> out;
    out.reserve(groups.size());
    for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
        if (it->second.is_zero()) continue;
        out.emplace_back(it->first, Expr(it->second, e.den()));
    }
    return out;
}

Expr epsilon_coefficient(const Expr& e, int k) {
    if (e.den().contains(Atom::symbol("epsilon")))
        throw Error("epsilon in denominator");
    std::vector<PolyTerm> ts;
    for (const auto& t : e.num().terms()) {
        if (t.mono.epsilon_exponent() != k) continue;
        Monomial m;
        for (const auto& f : t.mono.factors)
            if (!f.first.is_epsilon()) m.factors.push_back(f);
        ts.push_back({t.coeff, std::move(m)});
    }
    return Expr(Poly::from_terms(std::move(ts)), e.den());
}

int epsilon_degree(const Expr& e) {
    int d = 0;
    for (const auto& t : e.num().terms())
        d = std::max(d, t.mono.epsilon_exponent());
    return d;
}

} // namespace liesym
