#pragma once

#include <gmpxx.h>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "liesym/error.hpp"

namespace liesym {

// Exact rational scalar. All arithmetic in the engine is over Q.
using Rational = mpq_class;

Rational rat(long num, long den = 1);
std::string rat_str(const Rational& q);

enum class AtomKind : unsigned char { Symbol, Jet, Kernel, KernelDeriv, Unary };

class Expr;
struct Atom;

// A derivative coordinate u_{alpha,i1...ik}. The multi-index is kept sorted by
// the position of the independent variables, so u_xt and u_tx name the same
// coordinate. `pert` is the perturbation order in approximate mode (-1 means
// the plain, unexpanded variable).
struct JetData {
    std::string dep;
    int dep_index = 0;
    std::vector<int> index;
    std::vector<std::string> index_names;
    int pert = -1;

    std::string canonical_name() const;
};

// An opaque function kernel with a declared argument list (e.g. eta_u with
// dependencies (t, x, u)). Dependencies never change after registration.
struct KernelData {
    std::string name;
    std::vector<Atom> deps;
};

using JetPtr = std::shared_ptr<const JetData>;
using KernelPtr = std::shared_ptr<const KernelData>;

struct Atom {
    AtomKind kind = AtomKind::Symbol;
    std::string name;              // symbol name, kernel name, or unary operator
    JetPtr jet;                    // Jet
    KernelPtr kernel;              // Kernel, KernelDeriv
    std::vector<Atom> dvars;       // KernelDeriv: sorted differentiation variables
    std::shared_ptr<const Expr> arg; // Unary argument, canonical

    static Atom symbol(std::string name);
    static Atom jet_var(JetPtr data);
    static Atom kernel_ref(KernelPtr data);
    static Atom kernel_deriv(KernelPtr data, std::vector<Atom> dvars);
    static Atom unary(std::string op, const Expr& argument);

    bool is_epsilon() const { return kind == AtomKind::Symbol && name == "epsilon"; }
    int jet_order() const { return jet ? static_cast<int>(jet->index.size()) : 0; }
    bool depends_on(const Atom& v) const; // declared dependence for kernels
    std::string str() const;
};

int compare(const Atom& a, const Atom& b);
inline bool operator==(const Atom& a, const Atom& b) { return compare(a, b) == 0; }
inline bool operator!=(const Atom& a, const Atom& b) { return compare(a, b) != 0; }
inline bool operator<(const Atom& a, const Atom& b) { return compare(a, b) < 0; }

// Power product of atoms; factors sorted ascending, exponents >= 1.
struct Monomial {
    std::vector<std::pair<Atom, int>> factors;

    int degree() const;
    int exponent(const Atom& a) const;
    int epsilon_exponent() const;
    bool is_unit() const { return factors.empty(); }
    std::string str() const;
};

// Graded lexicographic order: total degree first, then exponents of the
// earliest differing atom decide.
int compare_grlex(const Monomial& a, const Monomial& b);
inline bool operator==(const Monomial& a, const Monomial& b) { return compare_grlex(a, b) == 0; }
inline bool operator<(const Monomial& a, const Monomial& b) { return compare_grlex(a, b) < 0; }

Monomial mono_mul(const Monomial& a, const Monomial& b);
std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b);
Monomial mono_gcd(const Monomial& a, const Monomial& b);

struct PolyTerm {
    Rational coeff;
    Monomial mono;
};

// Expanded sparse polynomial over Q in atoms, terms sorted leading-first.
class Poly {
public:
    Poly() = default;
    static Poly constant(const Rational& c);
    static Poly variable(const Atom& a);

    const std::vector<PolyTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    bool is_one() const;
    const Rational& leading_coeff() const;
    const Monomial& leading_mono() const;

    Poly operator-() const;
    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator-(const Poly& a, const Poly& b);
    friend Poly operator*(const Poly& a, const Poly& b);
    Poly scaled(const Rational& c) const;
    Poly pow(int e) const;

    // gcd of the coefficients, carrying the sign of the leading term.
    Rational signed_content() const;
    Poly divided_by_rational(const Rational& c) const;

    std::set<Atom> atoms() const;          // atoms occurring as factors or inside unaries
    bool contains(const Atom& a) const;
    int degree_in(const Atom& a) const;

    std::string str() const;

    // Builds a polynomial from unsorted/unnormalized terms.
    static Poly from_terms(std::vector<PolyTerm> terms);

private:
    std::vector<PolyTerm> terms_;
};

std::optional<Poly> divide_exact(const Poly& num, const Poly& den);

// Expression in canonical form: a quotient of expanded polynomials. The
// denominator is 1 whenever possible; is_zero tests the numerator.
class Expr {
public:
    Expr() : num_(), den_(Poly::constant(1)) {}
    explicit Expr(const Rational& c) : num_(Poly::constant(c)), den_(Poly::constant(1)) {}
    explicit Expr(long n) : Expr(Rational(n)) {}
    explicit Expr(const Atom& a) : num_(Poly::variable(a)), den_(Poly::constant(1)) {}
    Expr(Poly num, Poly den);

    static Expr zero() { return Expr(); }
    static Expr one() { return Expr(Rational(1)); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_rational() const { return den_.is_one() && num_.is_constant(); }
    Rational rational_value() const;
    bool has_denominator() const { return !den_.is_one(); }

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    Expr operator-() const;
    Expr& operator+=(const Expr& o) { *this = *this + o; return *this; }
    Expr& operator-=(const Expr& o) { *this = *this - o; return *this; }
    Expr& operator*=(const Expr& o) { *this = *this * o; return *this; }
    Expr pow(int e) const;

    bool equals(const Expr& o) const;

    // Partial derivative treating every other coordinate as constant; kernels
    // differentiate through their declared dependencies.
    Expr diff(const Atom& v) const;

    // Simultaneous, capture-free substitution of atoms.
    Expr substitute(const std::map<Atom, Expr>& bindings) const;

    std::set<Atom> atoms() const;
    bool contains(const Atom& a) const;
    int degree_in(const Atom& a) const;

    // Divides out rational content and fixes the sign of the leading term.
    Expr normalized_sign_content() const;

    std::string str() const;

private:
    Poly num_;
    Poly den_;
    void normalize();
};

inline Expr operator*(const Rational& c, const Expr& e) { return Expr(c) * e; }

// Re-sorts and recombines; the identity on well-formed expressions.
Expr canonicalize(const Expr& e);
bool is_zero(const Expr& e);

Expr diff_partial(const Expr& e, const Atom& v);
Expr substitute(const Expr& e, const std::map<Atom, Expr>& bindings);

// Partial derivative that does not chain through the listed kernels: they are
// treated as coordinates of their own (used for arbitrary elements, whose
// dependence is carried by explicit derivative coordinates).
Expr diff_partial_frozen(const Expr& e, const Atom& v,
                         const std::set<std::string>& frozen_kernels);

// Coefficient collection over monomials in `vars`. Coefficients are free of
// the collected variables; throws if the expression is not polynomial in one
// of them (reporting the offending subterm). Kernels listed in
// `independent_kernels` are treated as coordinates of their own (their
// declared dependencies do not make a coefficient "depend" on a variable).
std::vector<std::pair<Monomial, Expr>> collect_coefficients(
    const Expr& e, const std::set<Atom>& vars,
    const std::set<std::string>& independent_kernels = {});

// Scoped truncation order for the reserved symbol epsilon: products drop
// epsilon powers above the given order while a scope is alive.
class EpsilonTruncation {
public:
    explicit EpsilonTruncation(int order);
    ~EpsilonTruncation();
    EpsilonTruncation(const EpsilonTruncation&) = delete;
    EpsilonTruncation& operator=(const EpsilonTruncation&) = delete;
    static int current();

private:
    int previous_;
};

// Coefficient of epsilon^k with epsilon removed from the monomials.
Expr epsilon_coefficient(const Expr& e, int k);
int epsilon_degree(const Expr& e);

} // namespace liesym
