#include "ctprover/ast.hpp"

#include <algorithm>
#include <stdexcept>

namespace ctprover {

const char* binop_text(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::BitAnd: return "&";
    case BinOp::BitOr: return "|";
    case BinOp::BitXor: return "^";
    case BinOp::Shl: return "<<";
    case BinOp::Shr: return ">>";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::LogAnd: return "&&";
    case BinOp::LogOr: return "||";
    }
    return "?";
}

const char* unop_text(UnOp op) {
    switch (op) {
    case UnOp::BitNot: return "~";
    case UnOp::LogNot: return "!";
    case UnOp::Neg: return "-";
    }
    return "?";
}

ExprPtr Expr::lit(uint64_t v) { return std::make_shared<Expr>(Expr{IntLit{v}}); }
ExprPtr Expr::var(std::string name) { return std::make_shared<Expr>(Expr{Var{std::move(name)}}); }
ExprPtr Expr::array_read(std::string array, ExprPtr index) {
    return std::make_shared<Expr>(Expr{ArrayRead{std::move(array), std::move(index)}});
}
ExprPtr Expr::bin(BinOp op, ExprPtr l, ExprPtr r) {
    return std::make_shared<Expr>(Expr{Bin{op, std::move(l), std::move(r)}});
}
ExprPtr Expr::un(UnOp op, ExprPtr a) {
    return std::make_shared<Expr>(Expr{Un{op, std::move(a)}});
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (auto* l = std::get_if<Expr::IntLit>(&a.node))
        return l->value == std::get<Expr::IntLit>(b.node).value;
    if (auto* v = std::get_if<Expr::Var>(&a.node))
        return v->name == std::get<Expr::Var>(b.node).name;
    if (auto* r = std::get_if<Expr::ArrayRead>(&a.node)) {
        const auto& o = std::get<Expr::ArrayRead>(b.node);
        return r->array == o.array && expr_equal(*r->index, *o.index);
    }
    if (auto* bi = std::get_if<Expr::Bin>(&a.node)) {
        const auto& o = std::get<Expr::Bin>(b.node);
        return bi->op == o.op && expr_equal(*bi->lhs, *o.lhs) && expr_equal(*bi->rhs, *o.rhs);
    }
    const auto& u = std::get<Expr::Un>(a.node);
    const auto& o = std::get<Expr::Un>(b.node);
    return u.op == o.op && expr_equal(*u.arg, *o.arg);
}

void expr_vars(const Expr& e, std::vector<std::string>& out) {
    if (auto* v = std::get_if<Expr::Var>(&e.node)) {
        if (std::find(out.begin(), out.end(), v->name) == out.end()) out.push_back(v->name);
    } else if (auto* r = std::get_if<Expr::ArrayRead>(&e.node)) {
        expr_vars(*r->index, out);
    } else if (auto* b = std::get_if<Expr::Bin>(&e.node)) {
        expr_vars(*b->lhs, out);
        expr_vars(*b->rhs, out);
    } else if (auto* u = std::get_if<Expr::Un>(&e.node)) {
        expr_vars(*u->arg, out);
    }
}

void expr_arrays(const Expr& e, std::vector<std::string>& out) {
    if (auto* r = std::get_if<Expr::ArrayRead>(&e.node)) {
        if (std::find(out.begin(), out.end(), r->array) == out.end()) out.push_back(r->array);
        expr_arrays(*r->index, out);
    } else if (auto* b = std::get_if<Expr::Bin>(&e.node)) {
        expr_arrays(*b->lhs, out);
        expr_arrays(*b->rhs, out);
    } else if (auto* u = std::get_if<Expr::Un>(&e.node)) {
        expr_arrays(*u->arg, out);
    }
}

bool expr_has_array_read(const Expr& e) {
    if (std::holds_alternative<Expr::ArrayRead>(e.node)) return true;
    if (auto* b = std::get_if<Expr::Bin>(&e.node))
        return expr_has_array_read(*b->lhs) || expr_has_array_read(*b->rhs);
    if (auto* u = std::get_if<Expr::Un>(&e.node)) return expr_has_array_read(*u->arg);
    return false;
}

ExprPtr atom_expr(const Atom& a) {
    return a.lit ? Expr::lit(a.value) : Expr::var(a.var);
}

std::string atom_text(const Atom& a) {
    return a.lit ? std::to_string(a.value) : a.var;
}

StmtPtr Stmt::make(std::variant<Skip, Assign, Load, Store, Assert, Assume, If, While, Call, Block> n) {
    auto s = std::make_shared<Stmt>();
    s->node = std::move(n);
    return s;
}

const std::string& cond_var(const Expr& cond) {
    if (!cond.is_var()) throw std::logic_error("condition is not a variable; program not normalized");
    return cond.var_name();
}

const Procedure* Program::find_proc(const std::string& name) const {
    for (const auto& p : procedures)
        if (p.name == name) return &p;
    return nullptr;
}

Procedure* Program::find_proc(const std::string& name) {
    for (auto& p : procedures)
        if (p.name == name) return &p;
    return nullptr;
}

const Procedure& Program::entry_proc() const {
    const Procedure* p = find_proc(entry);
    if (!p) throw std::logic_error("entry procedure not found: " + entry);
    return *p;
}

const char* source_kind_text(SourceKind k) {
    switch (k) {
    case SourceKind::BranchCond: return "branch";
    case SourceKind::LoopCond: return "loop";
    case SourceKind::LoadIndex: return "load";
    case SourceKind::StoreIndex: return "store";
    }
    return "?";
}

const char* source_status_text(SourceStatus s) {
    switch (s) {
    case SourceStatus::Unresolved: return "unresolved";
    case SourceStatus::ResolvedStep1: return "resolved_step1";
    case SourceStatus::ResolvedStep2: return "resolved_step2";
    case SourceStatus::ResolvedStep3: return "resolved_step3";
    case SourceStatus::ConfirmedLeak: return "confirmed_leak";
    case SourceStatus::Unknown: return "unknown";
    }
    return "?";
}

namespace {

bool atom_equal(const Atom& a, const Atom& b) { return a == b; }

}  // namespace

bool stmt_equal(const Stmt& a, const Stmt& b, bool compare_labels) {
    if (compare_labels && a.label != b.label) return false;
    if (a.node.index() != b.node.index()) return false;
    if (a.is<Stmt::Skip>()) return true;
    if (a.is<Stmt::Assign>()) {
        const auto &x = a.as<Stmt::Assign>(), &y = b.as<Stmt::Assign>();
        return x.lhs == y.lhs && expr_equal(*x.rhs, *y.rhs);
    }
    if (a.is<Stmt::Load>()) {
        const auto &x = a.as<Stmt::Load>(), &y = b.as<Stmt::Load>();
        return x.lhs == y.lhs && x.array == y.array && atom_equal(x.index, y.index);
    }
    if (a.is<Stmt::Store>()) {
        const auto &x = a.as<Stmt::Store>(), &y = b.as<Stmt::Store>();
        if (static_cast<bool>(x.index_expr) != static_cast<bool>(y.index_expr) ||
            static_cast<bool>(x.value_expr) != static_cast<bool>(y.value_expr))
            return false;
        if (x.index_expr && !expr_equal(*x.index_expr, *y.index_expr)) return false;
        if (x.value_expr && !expr_equal(*x.value_expr, *y.value_expr)) return false;
        if (!x.index_expr && !atom_equal(x.index, y.index)) return false;
        if (!x.value_expr && !atom_equal(x.value, y.value)) return false;
        return x.array == y.array;
    }
    if (a.is<Stmt::Assert>())
        return expr_equal(*a.as<Stmt::Assert>().cond, *b.as<Stmt::Assert>().cond);
    if (a.is<Stmt::Assume>())
        return expr_equal(*a.as<Stmt::Assume>().cond, *b.as<Stmt::Assume>().cond);
    if (a.is<Stmt::If>()) {
        const auto &x = a.as<Stmt::If>(), &y = b.as<Stmt::If>();
        return expr_equal(*x.cond, *y.cond) && stmt_equal(*x.then_body, *y.then_body, compare_labels) &&
               stmt_equal(*x.else_body, *y.else_body, compare_labels);
    }
    if (a.is<Stmt::While>()) {
        const auto &x = a.as<Stmt::While>(), &y = b.as<Stmt::While>();
        if (x.invariants.size() != y.invariants.size()) return false;
        for (size_t i = 0; i < x.invariants.size(); i++)
            if (!expr_equal(*x.invariants[i], *y.invariants[i])) return false;
        return expr_equal(*x.cond, *y.cond) && stmt_equal(*x.body, *y.body, compare_labels);
    }
    if (a.is<Stmt::Call>()) {
        const auto &x = a.as<Stmt::Call>(), &y = b.as<Stmt::Call>();
        if (x.lhs != y.lhs || x.callee != y.callee || x.args.size() != y.args.size()) return false;
        for (size_t i = 0; i < x.args.size(); i++)
            if (!atom_equal(x.args[i], y.args[i])) return false;
        return true;
    }
    const auto &x = a.as<Stmt::Block>(), &y = b.as<Stmt::Block>();
    if (x.stmts.size() != y.stmts.size()) return false;
    for (size_t i = 0; i < x.stmts.size(); i++)
        if (!stmt_equal(*x.stmts[i], *y.stmts[i], compare_labels)) return false;
    return true;
}

namespace {

bool params_equal(const std::vector<Param>& a, const std::vector<Param>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); i++) {
        if (a[i].name != b[i].name || a[i].annot != b[i].annot ||
            a[i].is_array != b[i].is_array || a[i].length != b[i].length)
            return false;
    }
    return true;
}

}  // namespace

bool program_equal(const Program& a, const Program& b, bool compare_labels) {
    if (a.entry != b.entry || a.procedures.size() != b.procedures.size()) return false;
    for (size_t i = 0; i < a.procedures.size(); i++) {
        const auto &p = a.procedures[i], &q = b.procedures[i];
        if (p.name != q.name || !params_equal(p.params, q.params) || p.returns != q.returns ||
            p.locals != q.locals)
            return false;
        if (p.local_arrays.size() != q.local_arrays.size()) return false;
        for (size_t j = 0; j < p.local_arrays.size(); j++)
            if (p.local_arrays[j].name != q.local_arrays[j].name ||
                p.local_arrays[j].length != q.local_arrays[j].length)
                return false;
        if (!stmt_equal(*p.body, *q.body, compare_labels)) return false;
    }
    return true;
}

void for_each_stmt(const Stmt& s, const std::function<void(const Stmt&)>& fn) {
    if (const auto* b = std::get_if<Stmt::Block>(&s.node)) {
        for (const auto& c : b->stmts) for_each_stmt(*c, fn);
        return;
    }
    fn(s);
    if (const auto* i = std::get_if<Stmt::If>(&s.node)) {
        for_each_stmt(*i->then_body, fn);
        for_each_stmt(*i->else_body, fn);
    } else if (const auto* w = std::get_if<Stmt::While>(&s.node)) {
        for_each_stmt(*w->body, fn);
    }
}

void for_each_stmt(const Program& p, const std::function<void(const Stmt&)>& fn) {
    for (const auto& proc : p.procedures) for_each_stmt(*proc.body, fn);
}

int max_label(const Program& p) {
    int m = -1;
    for_each_stmt(p, [&](const Stmt& s) { m = std::max(m, s.label); });
    return m;
}

int stmt_count(const Program& p) {
    int n = 0;
    for_each_stmt(p, [&](const Stmt&) { n++; });
    return n;
}

const Stmt* find_stmt(const Program& p, int label) {
    const Stmt* found = nullptr;
    for_each_stmt(p, [&](const Stmt& s) {
        if (s.label == label) found = &s;
    });
    return found;
}

bool width_valid(int w) {
    return w == 4 || w == 8 || w == 16 || w == 32 || w == 64;
}

}  // namespace ctprover
