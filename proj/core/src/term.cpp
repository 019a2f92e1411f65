#include "ctprover/term.hpp"

#include <stdexcept>

#include "ctprover/errors.hpp"

namespace ctprover {

const char* term_op_text(TermOp op) {
    switch (op) {
        case TermOp::Const: return "const";
        case TermOp::Sym: return "sym";
        case TermOp::Add: return "add";
        case TermOp::Sub: return "sub";
        case TermOp::Mul: return "mul";
        case TermOp::Div: return "div";
        case TermOp::Mod: return "mod";
        case TermOp::And: return "and";
        case TermOp::Or: return "or";
        case TermOp::Xor: return "xor";
        case TermOp::Shl: return "shl";
        case TermOp::Shr: return "shr";
        case TermOp::Eq: return "eq";
        case TermOp::Ne: return "ne";
        case TermOp::Lt: return "lt";
        case TermOp::Le: return "le";
        case TermOp::Gt: return "gt";
        case TermOp::Ge: return "ge";
        case TermOp::LogAnd: return "logand";
        case TermOp::LogOr: return "logor";
        case TermOp::Not: return "not";
        case TermOp::LogNot: return "lognot";
        case TermOp::Neg: return "neg";
        case TermOp::Ite: return "ite";
    }
    return "?";
}

TermOp term_op(BinOp op) {
    switch (op) {
        case BinOp::Add: return TermOp::Add;
        case BinOp::Sub: return TermOp::Sub;
        case BinOp::Mul: return TermOp::Mul;
        case BinOp::Div: return TermOp::Div;
        case BinOp::Mod: return TermOp::Mod;
        case BinOp::BitAnd: return TermOp::And;
        case BinOp::BitOr: return TermOp::Or;
        case BinOp::BitXor: return TermOp::Xor;
        case BinOp::Shl: return TermOp::Shl;
        case BinOp::Shr: return TermOp::Shr;
        case BinOp::Eq: return TermOp::Eq;
        case BinOp::Ne: return TermOp::Ne;
        case BinOp::Lt: return TermOp::Lt;
        case BinOp::Le: return TermOp::Le;
        case BinOp::Gt: return TermOp::Gt;
        case BinOp::Ge: return TermOp::Ge;
        case BinOp::LogAnd: return TermOp::LogAnd;
        case BinOp::LogOr: return TermOp::LogOr;
    }
    throw std::logic_error("term_op: bad binop");
}

TermOp term_op(UnOp op) {
    switch (op) {
        case UnOp::BitNot: return TermOp::Not;
        case UnOp::LogNot: return TermOp::LogNot;
        case UnOp::Neg: return TermOp::Neg;
    }
    throw std::logic_error("term_op: bad unop");
}

int term_op_arity(TermOp op) {
    switch (op) {
        case TermOp::Const:
        case TermOp::Sym: return 0;
        case TermOp::Not:
        case TermOp::LogNot:
        case TermOp::Neg: return 1;
        case TermOp::Ite: return 3;
        default: return 2;
    }
}

uint64_t term_apply(TermOp op, uint64_t a, uint64_t b, uint64_t c, int width) {
    const uint64_t mask = width == 64 ? ~0ull : (1ull << width) - 1;
    const uint64_t uw = static_cast<uint64_t>(width);
    switch (op) {
        case TermOp::Add: return (a + b) & mask;
        case TermOp::Sub: return (a - b) & mask;
        case TermOp::Mul: return (a * b) & mask;
        case TermOp::Div: return b == 0 ? mask : (a / b) & mask;
        case TermOp::Mod: return b == 0 ? a : (a % b) & mask;
        case TermOp::And: return a & b;
        case TermOp::Or: return a | b;
        case TermOp::Xor: return a ^ b;
        case TermOp::Shl: return b >= uw ? 0 : (a << b) & mask;
        case TermOp::Shr: return b >= uw ? 0 : (a >> b) & mask;
        case TermOp::Eq: return a == b;
        case TermOp::Ne: return a != b;
        case TermOp::Lt: return a < b;
        case TermOp::Le: return a <= b;
        case TermOp::Gt: return a > b;
        case TermOp::Ge: return a >= b;
        case TermOp::LogAnd: return (a != 0 && b != 0) ? 1 : 0;
        case TermOp::LogOr: return (a != 0 || b != 0) ? 1 : 0;
        case TermOp::Not: return ~a & mask;
        case TermOp::LogNot: return a == 0 ? 1 : 0;
        case TermOp::Neg: return (0 - a) & mask;
        case TermOp::Ite: return a != 0 ? b : c;
        case TermOp::Const:
        case TermOp::Sym: break;
    }
    throw std::logic_error("term_apply: bad op");
}

TermBuilder::TermBuilder(int width) : width_(width) {
    if (!width_valid(width)) throw InputError("invalid width " + std::to_string(width));
}

uint64_t TermBuilder::mask() const {
    return width_ == 64 ? ~0ull : (1ull << width_) - 1;
}

TermRef TermBuilder::intern(TermOp op, uint64_t value, std::string sym,
                            std::array<TermRef, 3> args) {
    Key key{op, value, sym, args};
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    auto node = std::make_unique<Term>();
    node->op = op;
    node->value = value;
    node->sym = std::move(sym);
    node->args = args;
    node->id = static_cast<int>(nodes_.size());
    TermRef ref = node.get();
    nodes_.push_back(std::move(node));
    table_.emplace(std::move(key), ref);
    return ref;
}

TermRef TermBuilder::constant(uint64_t v) {
    return intern(TermOp::Const, v & mask(), {}, {});
}

TermRef TermBuilder::sym(const std::string& name) {
    return intern(TermOp::Sym, 0, name, {});
}

TermRef TermBuilder::app(TermOp op, TermRef a, TermRef b, TermRef c) {
    const int arity = term_op_arity(op);
    if (arity == 0) throw std::logic_error("app: leaf op");
    std::array<TermRef, 3> args{a, b, c};
    for (int i = 0; i < arity; ++i)
        if (!args[i]) throw std::logic_error("app: missing argument");
    for (int i = arity; i < 3; ++i) args[i] = nullptr;

    // constant folding
    bool all_const = true;
    for (int i = 0; i < arity; ++i) all_const &= args[i]->is_const();
    if (all_const)
        return constant(term_apply(op, a->value, arity > 1 ? b->value : 0,
                                   arity > 2 ? c->value : 0, width_));

    // identities that keep collapsed product statements cheap
    switch (op) {
        case TermOp::Ite:
            if (a->is_const()) return a->value ? b : c;
            if (b == c) return b;
            break;
        case TermOp::Eq:
            if (a == b) return true_();
            break;
        case TermOp::Le:
        case TermOp::Ge:
            if (a == b) return true_();
            break;
        case TermOp::Ne:
        case TermOp::Lt:
        case TermOp::Gt:
            if (a == b) return false_();
            break;
        case TermOp::Sub:
        case TermOp::Xor:
            if (a == b) return constant(0);
            if (b->is_const() && b->value == 0) return a;
            break;
        case TermOp::Add:
            if (a->is_const() && a->value == 0) return b;
            if (b->is_const() && b->value == 0) return a;
            break;
        case TermOp::Or:
            if (a->is_const() && a->value == 0) return b;
            if (b->is_const() && b->value == 0) return a;
            if (a == b) return a;
            break;
        case TermOp::And:
            if ((a->is_const() && a->value == 0) || (b->is_const() && b->value == 0))
                return constant(0);
            if (a->is_const() && a->value == mask()) return b;
            if (b->is_const() && b->value == mask()) return a;
            if (a == b) return a;
            break;
        case TermOp::Mul:
            if ((a->is_const() && a->value == 0) || (b->is_const() && b->value == 0))
                return constant(0);
            if (a->is_const() && a->value == 1) return b;
            if (b->is_const() && b->value == 1) return a;
            break;
        case TermOp::Shl:
        case TermOp::Shr:
            if (b->is_const() && b->value == 0) return a;
            break;
        case TermOp::LogAnd:
            if (a->is_const()) return a->value ? app(TermOp::Ne, b, constant(0)) : false_();
            if (b->is_const()) return b->value ? app(TermOp::Ne, a, constant(0)) : false_();
            break;
        case TermOp::LogOr:
            if (a->is_const()) return a->value ? true_() : app(TermOp::Ne, b, constant(0));
            if (b->is_const()) return b->value ? true_() : app(TermOp::Ne, a, constant(0));
            break;
        default:
            break;
    }
    return intern(op, 0, {}, args);
}

uint64_t term_eval(const TermBuilder& tb, TermRef t, const TermEnv& env) {
    std::vector<uint64_t> memo(tb.size(), 0);
    std::vector<char> done(tb.size(), 0);
    std::vector<std::pair<TermRef, bool>> stack{{t, false}};
    while (!stack.empty()) {
        auto [cur, expanded] = stack.back();
        stack.pop_back();
        if (done[cur->id]) continue;
        if (cur->is_const()) {
            memo[cur->id] = cur->value;
            done[cur->id] = 1;
            continue;
        }
        if (cur->is_sym()) {
            auto it = env.find(cur->sym);
            memo[cur->id] = it == env.end() ? 0 : (it->second & tb.mask());
            done[cur->id] = 1;
            continue;
        }
        const int arity = term_op_arity(cur->op);
        if (!expanded) {
            stack.push_back({cur, true});
            for (int i = 0; i < arity; ++i) stack.push_back({cur->args[i], false});
            continue;
        }
        uint64_t a = memo[cur->args[0]->id];
        uint64_t b = arity > 1 ? memo[cur->args[1]->id] : 0;
        uint64_t c = arity > 2 ? memo[cur->args[2]->id] : 0;
        memo[cur->id] = term_apply(cur->op, a, b, c, tb.width());
        done[cur->id] = 1;
    }
    return memo[t->id];
}

std::set<std::string> term_syms(TermRef t) {
    std::set<std::string> out;
    std::set<TermRef> seen;
    std::vector<TermRef> stack{t};
    while (!stack.empty()) {
        TermRef cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        if (cur->is_sym()) out.insert(cur->sym);
        for (int i = 0; i < term_op_arity(cur->op); ++i) stack.push_back(cur->args[i]);
    }
    return out;
}

namespace {

void term_text_rec(TermRef t, std::string& out, int depth) {
    if (t->is_const()) {
        out += std::to_string(t->value);
        return;
    }
    if (t->is_sym()) {
        out += t->sym;
        return;
    }
    if (depth > 200) {  // deep DAGs render elided rather than overflowing
        out += "...";
        return;
    }
    out += "(";
    out += term_op_text(t->op);
    for (int i = 0; i < term_op_arity(t->op); ++i) {
        out += " ";
        term_text_rec(t->args[i], out, depth + 1);
    }
    out += ")";
}

}  // namespace

std::string term_text(TermRef t) {
    std::string out;
    term_text_rec(t, out, 0);
    return out;
}

}  // namespace ctprover
