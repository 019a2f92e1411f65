#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ctprover/ast.hpp"

namespace ctprover {

// Verification-condition terms: a hash-consed DAG over fixed-width words.
// Comparison and logical operators yield 0 or 1 in the same width. Semantics
// match the interpreter bit for bit wherever the interpreter yields a value;
// the two partial operators take the usual bit-vector totalization
// (x/0 = all ones, x%0 = x), and symbolic execution separately assumes
// divisors nonzero on every path that evaluates them.
enum class TermOp {
    Const, Sym,
    Add, Sub, Mul, Div, Mod,
    And, Or, Xor, Shl, Shr,
    Eq, Ne, Lt, Le, Gt, Ge,
    LogAnd, LogOr,
    Not, LogNot, Neg,
    Ite,
};

const char* term_op_text(TermOp op);
TermOp term_op(BinOp op);
TermOp term_op(UnOp op);
int term_op_arity(TermOp op);  // 0 for Const/Sym

struct Term;
using TermRef = const Term*;

struct Term {
    TermOp op = TermOp::Const;
    uint64_t value = 0;                       // Const payload
    std::string sym;                          // Sym payload
    std::array<TermRef, 3> args{};            // up to arity
    int id = -1;                              // dense per-builder index

    bool is_const() const { return op == TermOp::Const; }
    bool is_sym() const { return op == TermOp::Sym; }
};

// One evaluation step on already-masked operands.
uint64_t term_apply(TermOp op, uint64_t a, uint64_t b, uint64_t c, int width);

// Arena and hash-cons table. Structural sharing makes syntactic equality a
// pointer comparison, and construction folds constants and a few identities
// (x+0, x&0, ite on a known condition, e==e, ...), so collapsed product
// statements frequently reduce guard terms to literal truth.
class TermBuilder {
public:
    explicit TermBuilder(int width);

    int width() const { return width_; }
    uint64_t mask() const;
    size_t size() const { return nodes_.size(); }

    TermRef constant(uint64_t v);
    TermRef sym(const std::string& name);
    TermRef app(TermOp op, TermRef a, TermRef b = nullptr, TermRef c = nullptr);

    TermRef bin(BinOp op, TermRef a, TermRef b) { return app(term_op(op), a, b); }
    TermRef un(UnOp op, TermRef a) { return app(term_op(op), a); }
    TermRef ite(TermRef c, TermRef a, TermRef b) { return app(TermOp::Ite, c, a, b); }
    TermRef bool_not(TermRef a) { return app(TermOp::LogNot, a); }
    TermRef eq(TermRef a, TermRef b) { return app(TermOp::Eq, a, b); }
    TermRef ne(TermRef a, TermRef b) { return app(TermOp::Ne, a, b); }
    TermRef and_(TermRef a, TermRef b) { return app(TermOp::LogAnd, a, b); }
    TermRef or_(TermRef a, TermRef b) { return app(TermOp::LogOr, a, b); }

    TermRef true_() { return constant(1); }
    TermRef false_() { return constant(0); }

private:
    using Key = std::tuple<TermOp, uint64_t, std::string, std::array<TermRef, 3>>;

    TermRef intern(TermOp op, uint64_t value, std::string sym, std::array<TermRef, 3> args);

    int width_;
    std::vector<std::unique_ptr<Term>> nodes_;
    std::map<Key, TermRef> table_;
};

using TermEnv = std::map<std::string, uint64_t>;

// Iterative DAG evaluation; unbound symbols evaluate to 0.
uint64_t term_eval(const TermBuilder& tb, TermRef t, const TermEnv& env);

// Distinct symbol names reachable from t, sorted.
std::set<std::string> term_syms(TermRef t);

// S-expression rendering, for diagnostics and tests.
std::string term_text(TermRef t);

}  // namespace ctprover
