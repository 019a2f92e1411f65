#include "ctprover/normalize.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ctprover/errors.hpp"

namespace ctprover {

namespace {

struct Sym {
    bool is_array = false;
    uint64_t length = 0;
};

using SymTab = std::map<std::string, Sym>;

SymTab build_symtab(const Procedure& proc) {
    SymTab t;
    auto add = [&](const std::string& n, Sym s) {
        if (!t.emplace(n, s).second)
            throw NormalizeError("duplicate declaration of '" + n + "' in " + proc.name);
    };
    for (const auto& p : proc.params) add(p.name, Sym{p.is_array, p.length});
    for (const auto& l : proc.locals) add(l, Sym{});
    for (const auto& a : proc.local_arrays) add(a.name, Sym{true, a.length});
    return t;
}

const Sym& lookup_scalar(const SymTab& t, const std::string& n, const std::string& proc) {
    auto it = t.find(n);
    if (it == t.end())
        throw UnknownIdentifierError("unknown identifier '" + n + "' in " + proc);
    if (it->second.is_array)
        throw NormalizeError("array '" + n + "' used as a scalar in " + proc);
    return it->second;
}

const Sym& lookup_array(const SymTab& t, const std::string& n, const std::string& proc) {
    auto it = t.find(n);
    if (it == t.end())
        throw UnknownIdentifierError("unknown array '" + n + "' in " + proc);
    if (!it->second.is_array)
        throw NormalizeError("scalar '" + n + "' used as an array in " + proc);
    return it->second;
}

ExprPtr rename_expr(const Expr& e, const std::map<std::string, std::string>& ren) {
    if (auto* l = std::get_if<Expr::IntLit>(&e.node)) return Expr::lit(l->value);
    if (auto* v = std::get_if<Expr::Var>(&e.node)) {
        auto it = ren.find(v->name);
        return Expr::var(it == ren.end() ? v->name : it->second);
    }
    if (auto* r = std::get_if<Expr::ArrayRead>(&e.node)) {
        auto it = ren.find(r->array);
        return Expr::array_read(it == ren.end() ? r->array : it->second,
                                rename_expr(*r->index, ren));
    }
    if (auto* b = std::get_if<Expr::Bin>(&e.node))
        return Expr::bin(b->op, rename_expr(*b->lhs, ren), rename_expr(*b->rhs, ren));
    const auto& u = std::get<Expr::Un>(e.node);
    return Expr::un(u.op, rename_expr(*u.arg, ren));
}

std::string rename_var(const std::string& n, const std::map<std::string, std::string>& ren) {
    auto it = ren.find(n);
    return it == ren.end() ? n : it->second;
}

Atom rename_atom(const Atom& a, const std::map<std::string, std::string>& ren) {
    if (a.lit) return a;
    return Atom::make_var(rename_var(a.var, ren));
}

StmtPtr rename_stmt(const Stmt& s, const std::map<std::string, std::string>& ren) {
    if (s.is<Stmt::Skip>()) return Stmt::make(Stmt::Skip{});
    if (s.is<Stmt::Assign>()) {
        const auto& a = s.as<Stmt::Assign>();
        return Stmt::make(Stmt::Assign{rename_var(a.lhs, ren), rename_expr(*a.rhs, ren)});
    }
    if (s.is<Stmt::Load>()) {
        const auto& l = s.as<Stmt::Load>();
        return Stmt::make(Stmt::Load{rename_var(l.lhs, ren), rename_var(l.array, ren),
                                     rename_atom(l.index, ren)});
    }
    if (s.is<Stmt::Store>()) {
        const auto& st = s.as<Stmt::Store>();
        Stmt::Store out;
        out.array = rename_var(st.array, ren);
        out.index = rename_atom(st.index, ren);
        out.value = rename_atom(st.value, ren);
        if (st.index_expr) out.index_expr = rename_expr(*st.index_expr, ren);
        if (st.value_expr) out.value_expr = rename_expr(*st.value_expr, ren);
        return Stmt::make(out);
    }
    if (s.is<Stmt::Assert>())
        return Stmt::make(Stmt::Assert{rename_expr(*s.as<Stmt::Assert>().cond, ren)});
    if (s.is<Stmt::Assume>())
        return Stmt::make(Stmt::Assume{rename_expr(*s.as<Stmt::Assume>().cond, ren)});
    if (s.is<Stmt::If>()) {
        const auto& i = s.as<Stmt::If>();
        return Stmt::make(Stmt::If{rename_expr(*i.cond, ren), rename_stmt(*i.then_body, ren),
                                   rename_stmt(*i.else_body, ren)});
    }
    if (s.is<Stmt::While>()) {
        const auto& w = s.as<Stmt::While>();
        std::vector<ExprPtr> invs;
        for (const auto& iv : w.invariants) invs.push_back(rename_expr(*iv, ren));
        return Stmt::make(Stmt::While{rename_expr(*w.cond, ren), rename_stmt(*w.body, ren),
                                      std::move(invs)});
    }
    if (s.is<Stmt::Call>()) {
        const auto& c = s.as<Stmt::Call>();
        Stmt::Call out;
        out.callee = c.callee;
        for (const auto& x : c.lhs) out.lhs.push_back(rename_var(x, ren));
        for (const auto& a : c.args) out.args.push_back(rename_atom(a, ren));
        return Stmt::make(std::move(out));
    }
    const auto& b = s.as<Stmt::Block>();
    Stmt::Block out;
    for (const auto& c : b.stmts) out.stmts.push_back(rename_stmt(*c, ren));
    return Stmt::make(std::move(out));
}

ExprPtr bounds_pred(const Atom& idx, uint64_t len) {
    return Expr::bin(BinOp::LogAnd, Expr::bin(BinOp::Le, Expr::lit(0), atom_expr(idx)),
                     Expr::bin(BinOp::Lt, atom_expr(idx), Expr::lit(len)));
}

bool is_bounds_assert(const Stmt& s, const Atom& idx, uint64_t len) {
    if (!s.is<Stmt::Assert>()) return false;
    return expr_equal(*s.as<Stmt::Assert>().cond, *bounds_pred(idx, len));
}

class Normalizer {
public:
    explicit Normalizer(const Program& in) : in_(in) {}

    Program run() {
        validate_procs();
        check_recursion();
        rename_apart();
        for (auto& proc : out_.procedures) lower_proc(proc);
        assign_labels(out_);
        return std::move(out_);
    }

private:
    void validate_procs() {
        std::set<std::string> names;
        for (const auto& proc : in_.procedures) {
            if (!names.insert(proc.name).second)
                throw NormalizeError("duplicate procedure '" + proc.name + "'");
        }
        if (!in_.find_proc(in_.entry))
            throw NormalizeError("entry procedure '" + in_.entry + "' not found");
        for (const auto& proc : in_.procedures) {
            bool is_entry = proc.name == in_.entry;
            for (const auto& p : proc.params) {
                if (is_entry && p.annot == Annot::None)
                    throw AnnotationError("entry parameter '" + p.name +
                                          "' must be annotated pub or sec");
                if (!is_entry && p.annot != Annot::None)
                    throw AnnotationError("parameter '" + p.name + "' of non-entry procedure '" +
                                          proc.name + "' must not carry an annotation");
            }
            SymTab tab = build_symtab(proc);
            for (const auto& r : proc.returns) {
                auto it = tab.find(r);
                if (it == tab.end())
                    throw UnknownIdentifierError("unknown return variable '" + r + "' in " +
                                                 proc.name);
                if (it->second.is_array)
                    throw NormalizeError("arrays cannot be returned ('" + r + "' in " + proc.name +
                                         ")");
            }
        }
    }

    void check_recursion() {
        // DFS over the call graph; any back edge is recursion.
        std::map<std::string, int> state;  // 0 unseen, 1 in progress, 2 done
        std::function<void(const std::string&)> visit = [&](const std::string& name) {
            int& st = state[name];
            if (st == 1) throw RecursionError("recursive call involving '" + name + "'");
            if (st == 2) return;
            st = 1;
            const Procedure* proc = in_.find_proc(name);
            if (proc) {
                for_each_stmt(*proc->body, [&](const Stmt& s) {
                    if (s.is<Stmt::Call>()) {
                        const auto& c = s.as<Stmt::Call>();
                        if (!in_.find_proc(c.callee))
                            throw UnknownIdentifierError("call to unknown procedure '" + c.callee +
                                                         "'");
                        visit(c.callee);
                    }
                });
            }
            st = 2;
        };
        visit(in_.entry);
        for (const auto& proc : in_.procedures) visit(proc.name);
    }

    void rename_apart() {
        out_.entry = in_.entry;
        for (const auto& proc : in_.procedures) {
            std::map<std::string, std::string> ren;
            auto fresh = [&](const std::string& want) {
                std::string name = want;
                int k = 2;
                while (!used_.insert(name).second) name = want + "$" + std::to_string(k++);
                return name;
            };
            Procedure np;
            np.name = proc.name;
            for (const auto& p : proc.params) {
                Param q = p;
                q.name = fresh(p.name);
                ren[p.name] = q.name;
                np.params.push_back(q);
            }
            for (const auto& l : proc.locals) {
                std::string n = fresh(l);
                ren[l] = n;
                np.locals.push_back(n);
            }
            for (const auto& a : proc.local_arrays) {
                ArrayDecl d = a;
                d.name = fresh(a.name);
                ren[a.name] = d.name;
                np.local_arrays.push_back(d);
            }
            for (const auto& r : proc.returns) np.returns.push_back(rename_var(r, ren));
            np.body = rename_stmt(*proc.body, ren);
            out_.procedures.push_back(std::move(np));
        }
    }

    // --- shape lowering -------------------------------------------------

    struct Ctx {
        Procedure* proc;
        SymTab* tab;
    };

    std::string fresh_temp(Ctx& cx) {
        std::string name;
        do {
            name = "t$" + std::to_string(++temp_counter_);
        } while (used_.count(name));
        used_.insert(name);
        cx.proc->locals.push_back(name);
        cx.tab->emplace(name, Sym{});
        return name;
    }

    void emit_access_checked(Ctx& cx, std::vector<StmtPtr>& out, const std::string& array,
                             const Atom& idx, StmtPtr access) {
        uint64_t len = lookup_array(*cx.tab, array, cx.proc->name).length;
        if (out.empty() || !is_bounds_assert(*out.back(), idx, len))
            out.push_back(Stmt::make(Stmt::Assert{bounds_pred(idx, len)}));
        out.push_back(std::move(access));
    }

    // Lowers e to a flat expression: operands are atoms, no array reads.
    ExprPtr lower_flat(Ctx& cx, std::vector<StmtPtr>& out, const Expr& e) {
        if (e.is_lit() || e.is_var()) return std::make_shared<Expr>(e);
        if (auto* r = std::get_if<Expr::ArrayRead>(&e.node)) {
            Atom idx = lower_atom(cx, out, *r->index);
            lookup_array(*cx.tab, r->array, cx.proc->name);
            std::string t = fresh_temp(cx);
            emit_access_checked(cx, out, r->array, idx, Stmt::make(Stmt::Load{t, r->array, idx}));
            return Expr::var(t);
        }
        if (auto* b = std::get_if<Expr::Bin>(&e.node)) {
            Atom l = lower_atom(cx, out, *b->lhs);
            Atom r2 = lower_atom(cx, out, *b->rhs);
            return Expr::bin(b->op, atom_expr(l), atom_expr(r2));
        }
        const auto& u = std::get<Expr::Un>(e.node);
        Atom a = lower_atom(cx, out, *u.arg);
        return Expr::un(u.op, atom_expr(a));
    }

    Atom lower_atom(Ctx& cx, std::vector<StmtPtr>& out, const Expr& e) {
        if (e.is_lit()) return Atom::make_lit(e.lit_value());
        if (e.is_var()) {
            lookup_scalar(*cx.tab, e.var_name(), cx.proc->name);
            return Atom::make_var(e.var_name());
        }
        ExprPtr flat = lower_flat(cx, out, e);
        if (flat->is_var()) return Atom::make_var(flat->var_name());
        std::string t = fresh_temp(cx);
        out.push_back(Stmt::make(Stmt::Assign{t, flat}));
        return Atom::make_var(t);
    }

    // Array reads hoisted out, scalar structure kept (assert/assume bodies).
    ExprPtr hoist_reads(Ctx& cx, std::vector<StmtPtr>& out, const Expr& e) {
        if (auto* r = std::get_if<Expr::ArrayRead>(&e.node)) {
            Atom idx = lower_atom(cx, out, *r->index);
            lookup_array(*cx.tab, r->array, cx.proc->name);
            std::string t = fresh_temp(cx);
            emit_access_checked(cx, out, r->array, idx, Stmt::make(Stmt::Load{t, r->array, idx}));
            return Expr::var(t);
        }
        if (auto* b = std::get_if<Expr::Bin>(&e.node))
            return Expr::bin(b->op, hoist_reads(cx, out, *b->lhs), hoist_reads(cx, out, *b->rhs));
        if (auto* u = std::get_if<Expr::Un>(&e.node))
            return Expr::un(u->op, hoist_reads(cx, out, *u->arg));
        if (e.is_var()) lookup_scalar(*cx.tab, e.var_name(), cx.proc->name);
        return std::make_shared<Expr>(e);
    }

    // Lowers a condition to a variable, emitting the computation into out.
    // Returns the statements needed to (re)compute the condition variable.
    std::string lower_cond(Ctx& cx, std::vector<StmtPtr>& out, const Expr& e) {
        if (e.is_var()) {
            lookup_scalar(*cx.tab, e.var_name(), cx.proc->name);
            return e.var_name();
        }
        ExprPtr flat = lower_flat(cx, out, e);
        std::string t = fresh_temp(cx);
        out.push_back(Stmt::make(Stmt::Assign{t, flat}));
        return t;
    }

    void lower_stmt(Ctx& cx, std::vector<StmtPtr>& out, const Stmt& s) {
        if (s.is<Stmt::Skip>()) {
            out.push_back(Stmt::make(Stmt::Skip{}));
        } else if (s.is<Stmt::Assign>()) {
            const auto& a = s.as<Stmt::Assign>();
            lookup_scalar(*cx.tab, a.lhs, cx.proc->name);
            // A bare array read becomes a Load directly.
            if (auto* r = std::get_if<Expr::ArrayRead>(&a.rhs->node)) {
                Atom idx = lower_atom(cx, out, *r->index);
                lookup_array(*cx.tab, r->array, cx.proc->name);
                emit_access_checked(cx, out, r->array, idx,
                                    Stmt::make(Stmt::Load{a.lhs, r->array, idx}));
                return;
            }
            ExprPtr flat = lower_flat(cx, out, *a.rhs);
            out.push_back(Stmt::make(Stmt::Assign{a.lhs, flat}));
        } else if (s.is<Stmt::Load>()) {
            const auto& l = s.as<Stmt::Load>();
            lookup_scalar(*cx.tab, l.lhs, cx.proc->name);
            if (!l.index.lit) lookup_scalar(*cx.tab, l.index.var, cx.proc->name);
            lookup_array(*cx.tab, l.array, cx.proc->name);
            emit_access_checked(cx, out, l.array, l.index, Stmt::make(Stmt::Load{l}));
        } else if (s.is<Stmt::Store>()) {
            const auto& st = s.as<Stmt::Store>();
            lookup_array(*cx.tab, st.array, cx.proc->name);
            Atom idx = st.index_expr ? lower_atom(cx, out, *st.index_expr) : st.index;
            Atom val = st.value_expr ? lower_atom(cx, out, *st.value_expr) : st.value;
            if (!idx.lit) lookup_scalar(*cx.tab, idx.var, cx.proc->name);
            if (!val.lit) lookup_scalar(*cx.tab, val.var, cx.proc->name);
            Stmt::Store ns;
            ns.array = st.array;
            ns.index = idx;
            ns.value = val;
            emit_access_checked(cx, out, st.array, idx, Stmt::make(ns));
        } else if (s.is<Stmt::Assert>()) {
            ExprPtr e = hoist_reads(cx, out, *s.as<Stmt::Assert>().cond);
            out.push_back(Stmt::make(Stmt::Assert{e}));
        } else if (s.is<Stmt::Assume>()) {
            ExprPtr e = hoist_reads(cx, out, *s.as<Stmt::Assume>().cond);
            out.push_back(Stmt::make(Stmt::Assume{e}));
        } else if (s.is<Stmt::If>()) {
            const auto& i = s.as<Stmt::If>();
            std::string cv = lower_cond(cx, out, *i.cond);
            std::vector<StmtPtr> tb, eb;
            lower_into(cx, tb, *i.then_body);
            lower_into(cx, eb, *i.else_body);
            out.push_back(Stmt::make(Stmt::If{Expr::var(cv), Stmt::make(Stmt::Block{std::move(tb)}),
                                              Stmt::make(Stmt::Block{std::move(eb)})}));
        } else if (s.is<Stmt::While>()) {
            const auto& w = s.as<Stmt::While>();
            std::vector<StmtPtr> pre;
            std::string cv = lower_cond(cx, pre, *w.cond);
            for (const auto& p : pre) out.push_back(p);
            std::vector<StmtPtr> body;
            lower_into(cx, body, *w.body);
            // Loop conditions are re-evaluated every iteration: replay the
            // computation at the end of the body.
            for (const auto& p : pre) body.push_back(clone_stmt(*p));
            std::vector<ExprPtr> invs;
            for (const auto& iv : w.invariants) {
                if (expr_has_array_read(*iv))
                    throw NormalizeError("loop invariants must not read arrays");
                std::vector<std::string> vars;
                expr_vars(*iv, vars);
                for (const auto& v : vars) lookup_scalar(*cx.tab, v, cx.proc->name);
                invs.push_back(iv);
            }
            out.push_back(Stmt::make(Stmt::While{Expr::var(cv),
                                                 Stmt::make(Stmt::Block{std::move(body)}),
                                                 std::move(invs)}));
        } else if (s.is<Stmt::Call>()) {
            lower_call(cx, out, s.as<Stmt::Call>());
        } else {
            const auto& b = s.as<Stmt::Block>();
            for (const auto& c : b.stmts) lower_stmt(cx, out, *c);
        }
    }

    void lower_into(Ctx& cx, std::vector<StmtPtr>& out, const Stmt& s) { lower_stmt(cx, out, s); }

    void lower_call(Ctx& cx, std::vector<StmtPtr>& out, const Stmt::Call& c) {
        const Procedure* callee = out_.find_proc(c.callee);
        if (!callee) throw UnknownIdentifierError("call to unknown procedure '" + c.callee + "'");
        if (c.args.size() != callee->params.size())
            throw ArityMismatchError("call to '" + c.callee + "' passes " +
                                     std::to_string(c.args.size()) + " arguments, expected " +
                                     std::to_string(callee->params.size()));
        if (c.lhs.size() != callee->returns.size())
            throw ArityMismatchError("call to '" + c.callee + "' binds " +
                                     std::to_string(c.lhs.size()) + " results, expected " +
                                     std::to_string(callee->returns.size()));
        std::set<std::string> array_args;
        for (size_t i = 0; i < c.args.size(); i++) {
            const Param& p = callee->params[i];
            const Atom& a = c.args[i];
            if (p.is_array) {
                if (a.lit)
                    throw NormalizeError("literal passed for array parameter '" + p.name + "'");
                const Sym& sym = lookup_array(*cx.tab, a.var, cx.proc->name);
                if (sym.length != p.length)
                    throw ArityMismatchError("array '" + a.var + "' has length " +
                                             std::to_string(sym.length) + ", parameter '" + p.name +
                                             "' expects " + std::to_string(p.length));
                if (!array_args.insert(a.var).second)
                    throw ArrayAliasError("array '" + a.var +
                                          "' passed twice in one call to '" + c.callee + "'");
            } else if (!a.lit) {
                lookup_scalar(*cx.tab, a.var, cx.proc->name);
            }
        }
        for (const auto& x : c.lhs) lookup_scalar(*cx.tab, x, cx.proc->name);
        out.push_back(Stmt::make(Stmt::Call{c.lhs, c.callee, c.args}));
    }

    void lower_proc(Procedure& proc) {
        SymTab tab = build_symtab(proc);
        Ctx cx{&proc, &tab};
        std::vector<StmtPtr> out;
        lower_stmt(cx, out, *proc.body);
        proc.body = Stmt::make(Stmt::Block{std::move(out)});
    }

    const Program& in_;
    Program out_;
    std::set<std::string> used_;
    int temp_counter_ = 0;
};

void assign_labels_stmt(Stmt& s, int& next) {
    if (auto* b = std::get_if<Stmt::Block>(&s.node)) {
        s.label = -1;
        for (auto& c : b->stmts) assign_labels_stmt(*c, next);
        return;
    }
    s.label = next++;
    if (auto* i = std::get_if<Stmt::If>(&s.node)) {
        assign_labels_stmt(*i->then_body, next);
        assign_labels_stmt(*i->else_body, next);
    } else if (auto* w = std::get_if<Stmt::While>(&s.node)) {
        assign_labels_stmt(*w->body, next);
    }
}

}  // namespace

void assign_labels(Program& p) {
    int next = 0;
    for (auto& proc : p.procedures) assign_labels_stmt(*proc.body, next);
}

StmtPtr clone_stmt(const Stmt& s) {
    StmtPtr c = std::make_shared<Stmt>();
    c->label = s.label;
    if (s.is<Stmt::If>()) {
        const auto& i = s.as<Stmt::If>();
        c->node = Stmt::If{i.cond, clone_stmt(*i.then_body), clone_stmt(*i.else_body)};
    } else if (s.is<Stmt::While>()) {
        const auto& w = s.as<Stmt::While>();
        c->node = Stmt::While{w.cond, clone_stmt(*w.body), w.invariants};
    } else if (s.is<Stmt::Block>()) {
        Stmt::Block b;
        for (const auto& x : s.as<Stmt::Block>().stmts) b.stmts.push_back(clone_stmt(*x));
        c->node = std::move(b);
    } else {
        c->node = s.node;
    }
    return c;
}

Program clone_program(const Program& p) {
    Program q;
    q.entry = p.entry;
    for (const auto& proc : p.procedures) {
        Procedure np = proc;
        np.body = clone_stmt(*proc.body);
        q.procedures.push_back(std::move(np));
    }
    return q;
}

Program normalize(const Program& p) {
    Normalizer n(p);
    return n.run();
}

std::vector<std::string> reachable_procedures(const Program& p) {
    std::vector<std::string> order;
    std::set<std::string> seen;
    std::function<void(const std::string&)> visit = [&](const std::string& name) {
        if (!seen.insert(name).second) return;
        order.push_back(name);
        const Procedure* proc = p.find_proc(name);
        if (!proc) return;
        for_each_stmt(*proc->body, [&](const Stmt& s) {
            if (s.is<Stmt::Call>()) visit(s.as<Stmt::Call>().callee);
        });
    };
    visit(p.entry);
    return order;
}

std::vector<Source> collect_sources(const Program& p) {
    std::vector<Source> out;
    for (const auto& name : reachable_procedures(p)) {
        const Procedure* proc = p.find_proc(name);
        if (!proc) continue;
        for_each_stmt(*proc->body, [&](const Stmt& s) {
            if (s.is<Stmt::If>()) {
                out.push_back({s.label, cond_var(*s.as<Stmt::If>().cond), SourceKind::BranchCond});
            } else if (s.is<Stmt::While>()) {
                out.push_back({s.label, cond_var(*s.as<Stmt::While>().cond), SourceKind::LoopCond});
            } else if (s.is<Stmt::Load>()) {
                const auto& l = s.as<Stmt::Load>();
                if (!l.index.lit) out.push_back({s.label, l.index.var, SourceKind::LoadIndex});
            } else if (s.is<Stmt::Store>()) {
                const auto& st = s.as<Stmt::Store>();
                if (!st.index.lit) out.push_back({s.label, st.index.var, SourceKind::StoreIndex});
            }
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_normalized(const Program& p) {
    // Unique names across procedures.
    std::set<std::string> names;
    for (const auto& proc : p.procedures) {
        for (const auto& pa : proc.params)
            if (!names.insert(pa.name).second) return false;
        for (const auto& l : proc.locals)
            if (!names.insert(l).second) return false;
        for (const auto& a : proc.local_arrays)
            if (!names.insert(a.name).second) return false;
    }
    auto flat_ok = [](const Expr& e) {
        if (e.is_lit() || e.is_var()) return true;
        if (auto* b = std::get_if<Expr::Bin>(&e.node))
            return (b->lhs->is_lit() || b->lhs->is_var()) && (b->rhs->is_lit() || b->rhs->is_var());
        if (auto* u = std::get_if<Expr::Un>(&e.node))
            return u->arg->is_lit() || u->arg->is_var();
        return false;  // array read
    };
    bool ok = true;
    int expected = 0;
    for (const auto& proc : p.procedures) {
        std::map<std::string, uint64_t> arrays;
        for (const auto& pa : proc.params)
            if (pa.is_array) arrays[pa.name] = pa.length;
        for (const auto& a : proc.local_arrays) arrays[a.name] = a.length;

        // Bounds assert immediately before each access, checked per block.
        std::function<void(const Stmt&)> walk = [&](const Stmt& s) {
            if (const auto* b = std::get_if<Stmt::Block>(&s.node)) {
                for (size_t i = 0; i < b->stmts.size(); i++) {
                    const Stmt& cur = *b->stmts[i];
                    const Atom* idx = nullptr;
                    const std::string* arr = nullptr;
                    if (cur.is<Stmt::Load>()) {
                        idx = &cur.as<Stmt::Load>().index;
                        arr = &cur.as<Stmt::Load>().array;
                    } else if (cur.is<Stmt::Store>()) {
                        if (cur.as<Stmt::Store>().index_expr || cur.as<Stmt::Store>().value_expr)
                            ok = false;
                        idx = &cur.as<Stmt::Store>().index;
                        arr = &cur.as<Stmt::Store>().array;
                    }
                    if (idx) {
                        auto it = arrays.find(*arr);
                        if (it == arrays.end() ||
                            i == 0 || !is_bounds_assert(*b->stmts[i - 1], *idx, it->second))
                            ok = false;
                    }
                    walk(cur);
                }
                return;
            }
            if (s.label != expected++) ok = false;
            if (s.is<Stmt::Assign>()) {
                if (!flat_ok(*s.as<Stmt::Assign>().rhs)) ok = false;
            } else if (s.is<Stmt::Assert>()) {
                if (expr_has_array_read(*s.as<Stmt::Assert>().cond)) ok = false;
            } else if (s.is<Stmt::Assume>()) {
                if (expr_has_array_read(*s.as<Stmt::Assume>().cond)) ok = false;
            } else if (s.is<Stmt::If>()) {
                const auto& i = s.as<Stmt::If>();
                if (!i.cond->is_var()) ok = false;
                walk(*i.then_body);
                walk(*i.else_body);
            } else if (s.is<Stmt::While>()) {
                const auto& w = s.as<Stmt::While>();
                if (!w.cond->is_var()) ok = false;
                walk(*w.body);
            }
        };
        walk(*proc.body);
    }
    return ok;
}

}  // namespace ctprover
