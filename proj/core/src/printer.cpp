#include "ctprover/printer.hpp"

#include <sstream>

namespace ctprover {

namespace {

int binop_prec(BinOp op) {
    switch (op) {
    case BinOp::LogOr: return 1;
    case BinOp::LogAnd: return 2;
    case BinOp::BitOr: return 3;
    case BinOp::BitXor: return 4;
    case BinOp::BitAnd: return 5;
    case BinOp::Eq:
    case BinOp::Ne: return 6;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 7;
    case BinOp::Shl:
    case BinOp::Shr: return 8;
    case BinOp::Add:
    case BinOp::Sub: return 9;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Mod: return 10;
    }
    return 0;
}

void print_expr(std::ostream& os, const Expr& e, int parent_prec) {
    if (auto* l = std::get_if<Expr::IntLit>(&e.node)) {
        os << l->value;
    } else if (auto* v = std::get_if<Expr::Var>(&e.node)) {
        os << v->name;
    } else if (auto* r = std::get_if<Expr::ArrayRead>(&e.node)) {
        os << r->array << "[";
        print_expr(os, *r->index, 0);
        os << "]";
    } else if (auto* b = std::get_if<Expr::Bin>(&e.node)) {
        int prec = binop_prec(b->op);
        bool paren = prec < parent_prec;
        if (paren) os << "(";
        // Left-associative: the right child needs the next level up.
        print_expr(os, *b->lhs, prec);
        os << " " << binop_text(b->op) << " ";
        print_expr(os, *b->rhs, prec + 1);
        if (paren) os << ")";
    } else {
        const auto& u = std::get<Expr::Un>(e.node);
        os << unop_text(u.op);
        // Parenthesize any non-primary operand: unary binds tightest.
        bool paren = std::holds_alternative<Expr::Bin>(u.arg->node);
        if (paren) os << "(";
        print_expr(os, *u.arg, 11);
        if (paren) os << ")";
    }
}

struct StmtPrinter {
    std::ostream& os;
    int depth = 1;

    void indent() {
        for (int i = 0; i < depth; i++) os << "    ";
    }

    void print_block(const Stmt& s) {
        if (const auto* b = std::get_if<Stmt::Block>(&s.node)) {
            for (const auto& c : b->stmts) print_block(*c);
            return;
        }
        print_one(s);
    }

    void print_one(const Stmt& s) {
        if (s.is<Stmt::Skip>()) {
            indent();
            os << "skip;\n";
        } else if (s.is<Stmt::Assign>()) {
            const auto& a = s.as<Stmt::Assign>();
            indent();
            os << a.lhs << " := ";
            print_expr(os, *a.rhs, 0);
            os << ";\n";
        } else if (s.is<Stmt::Load>()) {
            const auto& l = s.as<Stmt::Load>();
            indent();
            os << l.lhs << " := " << l.array << "[" << atom_text(l.index) << "];\n";
        } else if (s.is<Stmt::Store>()) {
            const auto& st = s.as<Stmt::Store>();
            indent();
            os << st.array << "[";
            if (st.index_expr)
                print_expr(os, *st.index_expr, 0);
            else
                os << atom_text(st.index);
            os << "] := ";
            if (st.value_expr)
                print_expr(os, *st.value_expr, 0);
            else
                os << atom_text(st.value);
            os << ";\n";
        } else if (s.is<Stmt::Assert>()) {
            indent();
            os << "assert ";
            print_expr(os, *s.as<Stmt::Assert>().cond, 0);
            os << ";\n";
        } else if (s.is<Stmt::Assume>()) {
            indent();
            os << "assume ";
            print_expr(os, *s.as<Stmt::Assume>().cond, 0);
            os << ";\n";
        } else if (s.is<Stmt::If>()) {
            const auto& i = s.as<Stmt::If>();
            indent();
            os << "if ";
            print_expr(os, *i.cond, 0);
            os << " then\n";
            depth++;
            print_block(*i.then_body);
            depth--;
            if (!stmt_is_empty(*i.else_body)) {
                indent();
                os << "else\n";
                depth++;
                print_block(*i.else_body);
                depth--;
            }
            indent();
            os << "fi\n";
        } else if (s.is<Stmt::While>()) {
            const auto& w = s.as<Stmt::While>();
            indent();
            os << "while ";
            print_expr(os, *w.cond, 0);
            for (const auto& inv : w.invariants) {
                os << " @inv(";
                print_expr(os, *inv, 0);
                os << ")";
            }
            os << " do\n";
            depth++;
            print_block(*w.body);
            depth--;
            indent();
            os << "od\n";
        } else if (s.is<Stmt::Call>()) {
            const auto& c = s.as<Stmt::Call>();
            indent();
            for (size_t i = 0; i < c.lhs.size(); i++) os << (i ? ", " : "") << c.lhs[i];
            if (!c.lhs.empty()) os << " := ";
            os << c.callee << "(";
            for (size_t i = 0; i < c.args.size(); i++) os << (i ? ", " : "") << atom_text(c.args[i]);
            os << ");\n";
        }
    }

    static bool stmt_is_empty(const Stmt& s) {
        if (const auto* b = std::get_if<Stmt::Block>(&s.node)) {
            for (const auto& c : b->stmts)
                if (!stmt_is_empty(*c)) return false;
            return true;
        }
        return false;
    }
};

}  // namespace

std::string pretty_print(const Expr& e) {
    std::ostringstream os;
    print_expr(os, e, 0);
    return os.str();
}

std::string pretty_print(const Program& p) {
    std::ostringstream os;
    bool first = true;
    for (const auto& proc : p.procedures) {
        if (!first) os << "\n";
        first = false;
        os << "def " << proc.name << "(";
        for (size_t i = 0; i < proc.params.size(); i++) {
            const Param& pa = proc.params[i];
            if (i) os << ", ";
            if (pa.annot == Annot::Public) os << "pub ";
            if (pa.annot == Annot::Secret) os << "sec ";
            os << pa.name;
            if (pa.is_array) os << "[" << pa.length << "]";
        }
        os << ") {\n";
        for (const auto& l : proc.locals) os << "    var " << l << ";\n";
        for (const auto& a : proc.local_arrays)
            os << "    array " << a.name << "[" << a.length << "];\n";
        StmtPrinter sp{os};
        sp.print_block(*proc.body);
        os << "    return";
        for (size_t i = 0; i < proc.returns.size(); i++)
            os << (i ? ", " : " ") << proc.returns[i];
        os << ";\n}\n";
    }
    return os.str();
}

}  // namespace ctprover
