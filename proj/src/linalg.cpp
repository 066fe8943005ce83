#include "liesym/linalg.hpp"

#include <algorithm>

namespace liesym {

namespace {

using ZVec = std::vector<mpz_class>;
using ZMat = std::vector<ZVec>;

// clear denominators row by row
ZMat to_integer(const QMat& a) {
    ZMat z;
    z.reserve(a.size());
    for (const auto& row : a) {
        mpz_class l = 1;
        for (const auto& q : row)
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den().get_mpz_t());
        ZVec zr;
        zr.reserve(row.size());
        for (const auto& q : row) zr.push_back(mpz_class(q.get_num() * (l / q.get_den())));
        z.push_back(std::move(zr));
    }
    return z;
}

struct Echelon {
    ZMat m;
    std::vector<int> pivot_cols; // in elimination order
    std::vector<int> free_cols;
};

// fraction-free (Bareiss) forward elimination
Echelon z_echelon(ZMat z, size_t cols) {
    Echelon e;
    size_t row = 0;
    mpz_class prev = 1;
    for (size_t col = 0; col < cols; ++col) {
        size_t piv = row;
        while (piv < z.size() && sgn(z[piv][col]) == 0) ++piv;
        if (piv == z.size()) {
            e.free_cols.push_back(static_cast<int>(col));
            continue;
        }
        std::swap(z[row], z[piv]);
        for (size_t i = row + 1; i < z.size(); ++i) {
            for (size_t j = col + 1; j < cols; ++j) {
                mpz_class v = z[row][col] * z[i][j] - z[i][col] * z[row][j];
                mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
                z[i][j] = v;
            }
            z[i][col] = 0;
        }
        prev = z[row][col];
        e.pivot_cols.push_back(static_cast<int>(col));
        ++row;
        if (row == z.size()) {
            for (size_t c = col + 1; c < cols; ++c)
                e.free_cols.push_back(static_cast<int>(c));
            break;
        }
    }
    e.m = std::move(z);
    return e;
}

} // namespace

int q_rank(QMat a) {
    if (a.empty()) return 0;
    Echelon e = z_echelon(to_integer(a), a[0].size());
    return static_cast<int>(e.pivot_cols.size());
}

std::vector<QVec> q_nullspace(const QMat& a, size_t cols) {
    Echelon e = a.empty() ? Echelon{} : z_echelon(to_integer(a), cols);
    if (a.empty())
        for (size_t c = 0; c < cols; ++c) e.free_cols.push_back(static_cast<int>(c));
    std::vector<QVec> basis;
    for (int f : e.free_cols) {
        QVec x(cols, Rational(0));
        x[f] = 1;
        // pivot rows are triangular; solve bottom-up
        for (int k = static_cast<int>(e.pivot_cols.size()) - 1; k >= 0; --k) {
            int c = e.pivot_cols[k];
            Rational s(0);
            for (size_t j = c + 1; j < cols; ++j)
                if (sgn(x[j]) != 0) s += Rational(e.m[k][j]) * x[j];
            x[c] = -s / Rational(e.m[k][c]);
        }
        // scale so the first nonzero entry is 1
        for (size_t j = 0; j < cols; ++j) {
            if (sgn(x[j]) != 0) {
                Rational lead = x[j];
                for (auto& v : x) v /= lead;
                break;
            }
        }
        basis.push_back(std::move(x));
    }
    return basis;
}

int q_rref(QMat& a) {
    if (a.empty()) return 0;
    size_t cols = a[0].size();
    size_t row = 0;
    for (size_t col = 0; col < cols && row < a.size(); ++col) {
        size_t piv = row;
        while (piv < a.size() && sgn(a[piv][col]) == 0) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[row], a[piv]);
        Rational d = a[row][col];
        for (auto& v : a[row]) v /= d;
        for (size_t i = 0; i < a.size(); ++i) {
            if (i == row || sgn(a[i][col]) == 0) continue;
            Rational f = a[i][col];
            for (size_t j = 0; j < cols; ++j) a[i][j] -= f * a[row][j];
        }
        ++row;
    }
    return static_cast<int>(row);
}

std::optional<QVec> q_express(const std::vector<QVec>& rows, const QVec& target) {
    // solve A^T x = target where A^T columns are the rows
    size_t n = rows.size();
    size_t m = target.size();
    QMat aug(m, QVec(n + 1, Rational(0)));
    for (size_t i = 0; i < m; ++i) {
        for (size_t k = 0; k < n; ++k) aug[i][k] = rows[k][i];
        aug[i][n] = target[i];
    }
    q_rref(aug);
    QVec x(n, Rational(0));
    for (size_t i = 0; i < m; ++i) {
        size_t lead = 0;
        while (lead <= n && sgn(aug[i][lead]) == 0) ++lead;
        if (lead == n) return std::nullopt; // 0 = nonzero
        if (lead > n) continue;
        x[lead] = aug[i][n]; // free variables take 0
    }
    // check
    for (size_t i = 0; i < m; ++i) {
        Rational s(0);
        for (size_t k = 0; k < n; ++k) s += rows[k][i] * x[k];
        if (s != target[i]) return std::nullopt;
    }
    return x;
}

// ---------------------------------------------------------------------------
// symbolic matrices

namespace {

std::vector<std::vector<Poly>> clear_denominators(std::vector<std::vector<Expr>>& m) {
    std::vector<std::vector<Poly>> out;
    out.reserve(m.size());
    for (auto& row : m) {
        for (int pass = 0; pass < 16; ++pass) {
            const Poly* den = nullptr;
            for (const auto& e : row)
                if (e.has_denominator()) den = &e.den();
            if (!den) break;
            Expr d(*den, Poly::constant(1));
            for (auto& e : row) e = e * d;
        }
        std::vector<Poly> prow;
        for (const auto& e : row) {
            if (e.has_denominator())
                throw Error("could not clear denominators of a matrix row");
            prow.push_back(e.num());
        }
        out.push_back(std::move(prow));
    }
    return out;
}

Poly bareiss_divide(const Poly& num, const Poly& den) {
    auto q = divide_exact(num, den);
    if (!q) throw Error("fraction-free elimination: inexact division");
    return *q;
}

} // namespace

int sym_rank(std::vector<std::vector<Expr>> m, std::vector<Expr>* pivots) {
    if (m.empty()) return 0;
    auto z = clear_denominators(m);
    size_t cols = z[0].size();
    size_t row = 0;
    Poly prev = Poly::constant(1);
    int rank = 0;
    for (size_t col = 0; col < cols && row < z.size(); ++col) {
        size_t piv = row;
        while (piv < z.size() && z[piv][col].is_zero()) ++piv;
        if (piv == z.size()) continue;
        std::swap(z[row], z[piv]);
        for (size_t i = row + 1; i < z.size(); ++i) {
            for (size_t j = col + 1; j < cols; ++j)
                z[i][j] = bareiss_divide(z[row][col] * z[i][j] - z[i][col] * z[row][j],
                                         prev);
            z[i][col] = Poly();
        }
        prev = z[row][col];
        if (pivots) pivots->push_back(Expr(prev, Poly::constant(1)));
        ++rank;
        ++row;
    }
    return rank;
}

Expr sym_det(std::vector<std::vector<Expr>> m) {
    size_t n = m.size();
    for (const auto& row : m)
        if (row.size() != n) throw Error("determinant of a non-square matrix");
    if (n == 0) return Expr::one();
    // determinant of the cleared matrix, divided back by the row multipliers
    Expr multiplier = Expr::one();
    for (auto& row : m) {
        for (int pass = 0; pass < 16; ++pass) {
            const Poly* den = nullptr;
            for (const auto& e : row)
                if (e.has_denominator()) den = &e.den();
            if (!den) break;
            Expr d(*den, Poly::constant(1));
            for (auto& e : row) e = e * d;
            multiplier = multiplier * d;
        }
    }
    std::vector<std::vector<Poly>> z;
    for (const auto& row : m) {
        std::vector<Poly> pr;
        for (const auto& e : row) pr.push_back(e.num());
        z.push_back(std::move(pr));
    }
    int sign = 1;
    Poly prev = Poly::constant(1);
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && z[piv][col].is_zero()) ++piv;
        if (piv == n) return Expr::zero();
        if (piv != col) {
            std::swap(z[col], z[piv]);
            sign = -sign;
        }
        for (size_t i = col + 1; i < n; ++i) {
            for (size_t j = col + 1; j < n; ++j)
                z[i][j] = bareiss_divide(z[col][col] * z[i][j] - z[i][col] * z[col][j],
                                         prev);
            z[i][col] = Poly();
        }
        prev = z[col][col];
    }
    Expr det(z[n - 1][n - 1], Poly::constant(1));
    if (sign < 0) det = -det;
    return det / multiplier;
}

} // namespace liesym
