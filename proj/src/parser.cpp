#include "liesym/parser.hpp"

#include <cctype>
#include <vector>

namespace liesym {

namespace {

enum class Tok { Int, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::string text;
    size_t pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    const std::string& src_;
    size_t pos_ = 0;
    Token tok_{Tok::End, "", 0};

    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        size_t start = pos_;
        if (pos_ >= src_.size()) {
            tok_ = {Tok::End, "", start};
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            tok_ = {Tok::Int, src_.substr(start, pos_ - start), start};
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_ = {Tok::Ident, src_.substr(start, pos_ - start), start};
            return;
        }
        ++pos_;
        switch (c) {
        case '+': tok_ = {Tok::Plus, "+", start}; return;
        case '-': tok_ = {Tok::Minus, "-", start}; return;
        case '*':
            if (pos_ < src_.size() && src_[pos_] == '*') {
                ++pos_;
                tok_ = {Tok::Caret, "**", start};
            } else {
                tok_ = {Tok::Star, "*", start};
            }
            return;
        case '/': tok_ = {Tok::Slash, "/", start}; return;
        case '^': tok_ = {Tok::Caret, "^", start}; return;
        case '(': tok_ = {Tok::LParen, "(", start}; return;
        case ')': tok_ = {Tok::RParen, ")", start}; return;
        case ',': tok_ = {Tok::Comma, ",", start}; return;
        default:
            throw Error("parse error at position " + std::to_string(start) +
                        ": unexpected character '" + std::string(1, c) + "'");
        }
    }
};

class Parser {
public:
    Parser(const std::string& src, SymbolTable& symbols) : lex_(src), symbols_(symbols) {}

    Expr parse_all() {
        Expr e = parse_expr();
        expect(Tok::End, "end of input");
        return e;
    }

private:
    Lexer lex_;
    SymbolTable& symbols_;

    [[noreturn]] void fail(const Token& t, const std::string& what) {
        throw Error("parse error at position " + std::to_string(t.pos) + ": " + what +
                    (t.text.empty() ? "" : " (found '" + t.text + "')"));
    }

    void expect(Tok kind, const std::string& what) {
        if (lex_.peek().kind != kind) fail(lex_.peek(), "expected " + what);
        lex_.take();
    }

    Expr parse_expr() {
        Expr e = parse_term();
        while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
            Tok op = lex_.take().kind;
            Expr rhs = parse_term();
            e = op == Tok::Plus ? e + rhs : e - rhs;
        }
        return e;
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (lex_.peek().kind == Tok::Star || lex_.peek().kind == Tok::Slash) {
            Token op = lex_.take();
            Expr rhs = parse_factor();
            if (op.kind == Tok::Star) {
                e = e * rhs;
            } else {
                if (rhs.is_zero()) fail(op, "division by zero");
                e = e / rhs;
            }
        }
        return e;
    }

    Expr parse_factor() {
        bool neg = false;
        while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
            if (lex_.take().kind == Tok::Minus) neg = !neg;
        }
        Expr e = parse_power();
        return neg ? -e : e;
    }

    Expr parse_power() {
        Expr base = parse_base();
        if (lex_.peek().kind == Tok::Caret) {
            lex_.take();
            bool neg = false;
            if (lex_.peek().kind == Tok::Minus) {
                lex_.take();
                neg = true;
            }
            Token t = lex_.peek();
            if (t.kind != Tok::Int) fail(t, "expected integer exponent");
            lex_.take();
            int e = std::stoi(t.text);
            if (neg && base.is_zero()) fail(t, "zero raised to a negative power");
            return base.pow(neg ? -e : e);
        }
        return base;
    }

    Expr parse_base() {
        Token t = lex_.peek();
        if (t.kind == Tok::Int) {
            lex_.take();
            return Expr(Rational(t.text));
        }
        if (t.kind == Tok::LParen) {
            lex_.take();
            Expr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (t.kind == Tok::Ident) {
            lex_.take();
            if (lex_.peek().kind == Tok::LParen) {
                if (t.text == "df") return parse_df(t);
                if (symbols_.is_unary_op(t.text)) {
                    lex_.take();
                    Expr arg = parse_expr();
                    expect(Tok::RParen, "')'");
                    return Expr(Atom::unary(t.text, arg));
                }
                fail(t, "'" + t.text + "' is not callable; declare function "
                        "dependencies with 'depend' and reference the bare name");
            }
            try {
                return Expr(symbols_.resolve(t.text));
            } catch (const Error& err) {
                fail(t, err.what());
            }
        }
        fail(t, "expected a number, identifier, or '('");
    }

    Expr parse_df(const Token& dft) {
        expect(Tok::LParen, "'('");
        Token name = lex_.peek();
        if (name.kind != Tok::Ident) fail(name, "expected a function name in df(...)");
        lex_.take();
        if (!symbols_.has_kernel(name.text))
            fail(name, "df of '" + name.text + "': not a declared function");
        KernelPtr k = symbols_.kernel(name.text);
        std::vector<Atom> dvars;
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            Token vt = lex_.peek();
            if (vt.kind == Tok::Int) {
                lex_.take();
                int n = std::stoi(vt.text);
                if (dvars.empty() || n < 1) fail(vt, "misplaced repetition count in df(...)");
                for (int i = 1; i < n; ++i) dvars.push_back(dvars.back());
                continue;
            }
            if (vt.kind != Tok::Ident) fail(vt, "expected a variable in df(...)");
            lex_.take();
            Atom v = [&]() -> Atom {
                try {
                    return symbols_.resolve(vt.text);
                } catch (const Error& err) {
                    fail(vt, err.what());
                }
            }();
            bool declared = false;
            for (const Atom& d : k->deps)
                if (d == v) declared = true;
            if (!declared)
                fail(vt, "df(" + name.text + "," + vt.text + "): '" + name.text +
                             "' has no declared dependence on '" + vt.text + "'");
            dvars.push_back(v);
        }
        expect(Tok::RParen, "')'");
        if (dvars.empty()) fail(dft, "df(...) needs at least one differentiation variable");
        return Expr(Atom::kernel_deriv(k, std::move(dvars)));
    }
};

} // namespace

Expr parse(const std::string& text, SymbolTable& symbols) {
    Parser p(text, symbols);
    return p.parse_all();
}

} // namespace liesym
