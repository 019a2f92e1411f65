#include <doctest.h>

#include <random>

#include "ctprover/interp.hpp"
#include "ctprover/normalize.hpp"
#include "ctprover/parser.hpp"
#include "ctprover/printer.hpp"
#include "ctprover/term.hpp"

using namespace ctprover;

namespace {

// Random flat expressions over three variables, for differential testing.
ExprPtr random_expr(std::mt19937_64& rng, int depth) {
    auto leaf = [&]() -> ExprPtr {
        switch (rng() % 4) {
            case 0: return Expr::var("a");
            case 1: return Expr::var("b");
            case 2: return Expr::var("c");
            default: return Expr::lit(rng() & 0xff);
        }
    };
    if (depth == 0 || rng() % 4 == 0) return leaf();
    if (rng() % 5 == 0) {
        static const UnOp uops[] = {UnOp::BitNot, UnOp::LogNot, UnOp::Neg};
        return Expr::un(uops[rng() % 3], random_expr(rng, depth - 1));
    }
    static const BinOp bops[] = {
        BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod,
        BinOp::BitAnd, BinOp::BitOr, BinOp::BitXor, BinOp::Shl, BinOp::Shr,
        BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge,
        BinOp::LogAnd, BinOp::LogOr,
    };
    return Expr::bin(bops[rng() % 18], random_expr(rng, depth - 1), random_expr(rng, depth - 1));
}

TermRef compile(TermBuilder& tb, const Expr& e) {
    if (e.is_lit()) return tb.constant(e.lit_value());
    if (e.is_var()) return tb.sym(e.var_name());
    if (auto* b = std::get_if<Expr::Bin>(&e.node))
        return tb.bin(b->op, compile(tb, *b->lhs), compile(tb, *b->rhs));
    const auto& u = std::get<Expr::Un>(e.node);
    return tb.un(u.op, compile(tb, *u.arg));
}

}  // namespace

TEST_CASE("term evaluation matches the interpreter on random expressions") {
    std::mt19937_64 rng(7);
    for (int width : {4, 8, 16, 32, 64}) {
        const uint64_t mask = width == 64 ? ~0ull : (1ull << width) - 1;
        int compared = 0;
        for (int iter = 0; iter < 400; ++iter) {
            auto e = random_expr(rng, 3);
            std::string src = "def main(pub a, pub b, pub c) {\n    var r;\n    r := " +
                              pretty_print(*e) + ";\n    return r;\n}\n";
            auto norm = normalize(parse(src));

            InputBinding in;
            in.scalars = {{"a", rng() & mask}, {"b", rng() & mask}, {"c", rng() & mask}};
            Interpreter interp(norm, width);
            auto run = interp.run(in);
            if (run.status != RunStatus::Complete) continue;  // division by zero halts

            TermBuilder tb(width);
            TermEnv env(in.scalars.begin(), in.scalars.end());
            CHECK(term_eval(tb, compile(tb, *e), env) == run.returns.at("r"));
            ++compared;
        }
        CHECK(compared > 200);
    }
}

TEST_CASE("hash consing shares structurally equal nodes") {
    TermBuilder tb(8);
    auto* a = tb.sym("a");
    auto* b = tb.sym("b");
    auto* s1 = tb.app(TermOp::Add, a, b);
    auto* s2 = tb.app(TermOp::Add, tb.sym("a"), tb.sym("b"));
    CHECK(s1 == s2);
    size_t before = tb.size();
    tb.app(TermOp::Add, a, b);
    tb.constant(300);  // masked to 44, same as an existing constant only if built
    CHECK(tb.size() == before + 1);
    CHECK(tb.constant(300 & 0xff) == tb.constant(300));
}

TEST_CASE("construction folds constants with interpreter semantics") {
    TermBuilder tb(8);
    auto c = [&](uint64_t v) { return tb.constant(v); };
    CHECK(tb.app(TermOp::Add, c(200), c(100))->value == 44);
    CHECK(tb.app(TermOp::Shl, c(1), c(8))->value == 0);   // shift count reaches width
    CHECK(tb.app(TermOp::Shr, c(255), c(9))->value == 0);
    CHECK(tb.app(TermOp::Shl, c(1), c(7))->value == 128);
    CHECK(tb.app(TermOp::Div, c(7), c(0))->value == 255);  // bit-vector totalization
    CHECK(tb.app(TermOp::Mod, c(7), c(0))->value == 7);
    CHECK(tb.app(TermOp::Lt, c(3), c(5))->value == 1);
    CHECK(tb.app(TermOp::LogAnd, c(2), c(4))->value == 1);
    CHECK(tb.app(TermOp::Neg, c(1))->value == 255);
}

TEST_CASE("identities collapse without losing semantics") {
    TermBuilder tb(8);
    auto* x = tb.sym("x");
    auto* y = tb.sym("y");
    CHECK(tb.app(TermOp::Add, x, tb.constant(0)) == x);
    CHECK(tb.app(TermOp::Mul, x, tb.constant(1)) == x);
    CHECK(tb.app(TermOp::Mul, x, tb.constant(0))->value == 0);
    CHECK(tb.app(TermOp::And, x, tb.constant(0xff)) == x);
    CHECK(tb.app(TermOp::Eq, x, x) == tb.true_());
    CHECK(tb.app(TermOp::Sub, x, x)->value == 0);
    CHECK(tb.ite(tb.true_(), x, y) == x);
    CHECK(tb.ite(tb.false_(), x, y) == y);
    CHECK(tb.ite(tb.app(TermOp::Lt, x, y), x, x) == x);
    // logical ops on known operands reduce to a boolean test of the other
    CHECK(tb.and_(tb.true_(), x) == tb.ne(x, tb.constant(0)));
    CHECK(tb.or_(tb.false_(), x) == tb.ne(x, tb.constant(0)));
    CHECK(tb.or_(tb.true_(), x) == tb.true_());
}

TEST_CASE("evaluation walks shared structure and defaults unbound symbols") {
    TermBuilder tb(16);
    auto* x = tb.sym("x");
    auto* sq = tb.app(TermOp::Mul, x, x);
    auto* t = tb.app(TermOp::Add, sq, sq);
    CHECK(term_eval(tb, t, {{"x", 9}}) == 162);
    CHECK(term_eval(tb, t, {}) == 0);
    // deep chain evaluates without recursion limits
    TermRef acc = tb.constant(1);
    for (int i = 0; i < 30000; ++i) acc = tb.app(TermOp::Add, acc, x);
    CHECK(term_eval(tb, acc, {{"x", 1}}) == 30001 % 65536);
}

TEST_CASE("symbol collection and rendering") {
    TermBuilder tb(8);
    auto* t = tb.ite(tb.eq(tb.sym("k"), tb.constant(3)), tb.sym("p"), tb.sym("k"));
    CHECK(term_syms(t) == std::set<std::string>{"k", "p"});
    CHECK(term_text(t) == "(ite (eq k 3) p k)");
    CHECK(term_text(tb.constant(9)) == "9");
}
