#include "ctprover/product.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "ctprover/errors.hpp"
#include "ctprover/normalize.hpp"

namespace ctprover {

const char* product_kind_text(ProductKind k) {
    return k == ProductKind::SemiCross ? "semi" : "cross";
}

const char* pred_status_text(PredStatus s) {
    switch (s) {
        case PredStatus::Candidate: return "candidate";
        case PredStatus::Confirmed: return "confirmed";
        case PredStatus::Dropped: return "dropped";
    }
    return "?";
}

std::string companion_name(const std::string& name, ProductKind kind) {
    return (kind == ProductKind::SemiCross ? "b$" : "sh$") + name;
}

ExprPtr xi(const Expr& e) {
    if (e.is_lit()) return Expr::lit(0);
    if (e.is_var()) return Expr::var(companion_name(e.var_name(), ProductKind::SemiCross));
    if (auto* b = std::get_if<Expr::Bin>(&e.node))
        return Expr::bin(BinOp::BitOr, xi(*b->lhs), xi(*b->rhs));
    if (auto* u = std::get_if<Expr::Un>(&e.node)) return xi(*u->arg);
    throw CtError("xi expects a flat expression");
}

ExprPtr Xi(const Expr& e) {
    if (e.is_lit()) return Expr::lit(e.lit_value());
    if (e.is_var()) return Expr::var(companion_name(e.var_name(), ProductKind::Cross));
    if (auto* b = std::get_if<Expr::Bin>(&e.node)) return Expr::bin(b->op, Xi(*b->lhs), Xi(*b->rhs));
    if (auto* u = std::get_if<Expr::Un>(&e.node)) return Expr::un(u->op, Xi(*u->arg));
    throw CtError("Xi expects a flat expression");
}

std::vector<Predicate> gen_invariants(const Stmt& loop, ProductKind mode, const DefUse& du) {
    const auto& w = loop.as<Stmt::While>();
    const std::string& cv = cond_var(*w.cond);

    std::map<int, const Stmt*> body_stmt;
    for_each_stmt(*w.body, [&](const Stmt& s) {
        if (s.label >= 0 && !s.is<Stmt::Block>()) body_stmt[s.label] = &s;
    });
    auto body_defs = [&](const std::string& v) {
        std::vector<const Stmt*> sites;
        auto it = du.scalar_defs.find(v);
        if (it == du.scalar_defs.end()) return sites;
        for (int l : it->second) {
            auto bs = body_stmt.find(l);
            if (bs != body_stmt.end()) sites.push_back(bs->second);
        }
        return sites;
    };

    // variables feeding the loop condition through body definitions
    std::set<std::string> closure{cv};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& v : std::set<std::string>(closure))
            for (const Stmt* s : body_defs(v))
                for (const auto& r : stmt_access(*s).scalar_reads)
                    changed |= closure.insert(r).second;
    }

    std::vector<Predicate> preds;
    for (const auto& y : closure) {
        if (body_defs(y).empty()) continue;
        ExprPtr e = mode == ProductKind::SemiCross
                        ? Expr::un(UnOp::LogNot, Expr::var(companion_name(y, mode)))
                        : Expr::bin(BinOp::Eq, Expr::var(y), Expr::var(companion_name(y, mode)));
        preds.push_back({std::move(e), PredStatus::Candidate});
    }
    return preds;
}

namespace {

class ProductBuilder {
public:
    ProductBuilder(const Program& p, const TaintMap& tmap, ProductKind kind)
        : p_(p), tmap_(tmap), kind_(kind), icfg_(build_icfg(p)), du_(def_use(p, icfg_)) {}

    ProductProgram build() {
        ProductProgram out;
        out.kind = kind_;
        out.program.entry = p_.entry;
        for (const auto& proc : p_.procedures)
            out.program.procedures.push_back(transform_proc(proc));
        finalize(out);
        return out;
    }

private:
    std::string comp(const std::string& n) const { return companion_name(n, kind_); }

    Atom comp_atom(const Atom& a) const {
        if (a.lit) return kind_ == ProductKind::SemiCross ? Atom::make_lit(0) : a;
        return Atom::make_var(comp(a.var));
    }

    std::string fresh_copy_tmp(const Procedure& proc) const {
        std::set<std::string> taken(proc.locals.begin(), proc.locals.end());
        for (const auto& prm : proc.params) taken.insert(prm.name);
        std::string n = "cp$0";
        for (int i = 0; taken.count(n); ++i) n = "cp$" + std::to_string(i);
        return n;
    }

    Procedure transform_proc(const Procedure& proc) {
        Procedure out;
        out.name = proc.name;
        const bool entry = proc.name == p_.entry;

        if (entry) {
            out.params = proc.params;
            if (kind_ == ProductKind::Cross)
                for (const auto& prm : proc.params)
                    if (prm.annot == Annot::Secret)
                        out.params.push_back({comp(prm.name), Annot::Secret, prm.is_array, prm.length});
        } else {
            for (const auto& prm : proc.params) {
                out.params.push_back({prm.name, Annot::None, prm.is_array, prm.length});
                out.params.push_back({comp(prm.name), Annot::None, prm.is_array, prm.length});
            }
        }

        for (const auto& r : proc.returns) {
            out.returns.push_back(r);
            out.returns.push_back(comp(r));
        }

        out.locals = proc.locals;
        for (const auto& v : proc.locals) out.locals.push_back(comp(v));
        out.local_arrays = proc.local_arrays;
        for (const auto& a : proc.local_arrays) out.local_arrays.push_back({comp(a.name), a.length});

        std::vector<StmtPtr> body;
        if (entry) {
            // entry inputs get companion locals (cross: only public ones, the
            // secret shadows are fresh parameters)
            for (const auto& prm : proc.params) {
                if (kind_ == ProductKind::Cross && prm.annot != Annot::Public) continue;
                if (prm.is_array)
                    out.local_arrays.push_back({comp(prm.name), prm.length});
                else
                    out.locals.push_back(comp(prm.name));
            }
            copy_tmp_ = fresh_copy_tmp(out);
            bool needs_tmp = false;
            for (const auto& prm : proc.params)
                needs_tmp |= prm.is_array && kind_ == ProductKind::Cross && prm.annot == Annot::Public;
            if (needs_tmp) out.locals.push_back(copy_tmp_);
            emit_entry_init(proc, body);
        }
        emit(*proc.body, body);
        out.body = Stmt::make(Stmt::Block{std::move(body)});
        return out;
    }

    void emit_entry_init(const Procedure& proc, std::vector<StmtPtr>& out) {
        for (const auto& prm : proc.params) {
            if (kind_ == ProductKind::SemiCross) {
                uint64_t bit = prm.annot == Annot::Secret ? 1 : 0;
                if (prm.is_array) {
                    for (uint64_t i = 0; i < prm.length; ++i)
                        out.push_back(Stmt::make(Stmt::Store{
                            comp(prm.name), Atom::make_lit(i), Atom::make_lit(bit), nullptr, nullptr}));
                } else {
                    out.push_back(Stmt::make(Stmt::Assign{comp(prm.name), Expr::lit(bit)}));
                }
            } else {
                if (prm.annot != Annot::Public) continue;
                if (prm.is_array) {
                    for (uint64_t i = 0; i < prm.length; ++i) {
                        out.push_back(Stmt::make(Stmt::Load{copy_tmp_, prm.name, Atom::make_lit(i)}));
                        out.push_back(Stmt::make(Stmt::Store{
                            comp(prm.name), Atom::make_lit(i), Atom::make_var(copy_tmp_), nullptr, nullptr}));
                    }
                } else {
                    out.push_back(Stmt::make(Stmt::Assign{comp(prm.name), Expr::var(prm.name)}));
                }
            }
        }
    }

    void guard_var(const std::string& v, int label, SourceKind k, std::vector<StmtPtr>& out) {
        if (!tmap_.scalar_tainted(label, v)) return;
        ExprPtr cond = kind_ == ProductKind::SemiCross
                           ? Expr::un(UnOp::LogNot, Expr::var(comp(v)))
                           : Expr::bin(BinOp::Eq, Expr::var(v), Expr::var(comp(v)));
        auto n = Stmt::make(Stmt::Assert{std::move(cond)});
        out.push_back(n);
        guards_.push_back({n.get(), Source{label, v, k, SourceStatus::Unresolved}});
    }

    void guard(const Atom& a, int label, SourceKind k, std::vector<StmtPtr>& out) {
        if (!a.lit) guard_var(a.var, label, k, out);
    }

    StmtPtr transform_block(const Stmt& b) {
        std::vector<StmtPtr> out;
        emit(b, out);
        return Stmt::make(Stmt::Block{std::move(out)});
    }

    void emit(const Stmt& s, std::vector<StmtPtr>& out) {
        if (auto* b = std::get_if<Stmt::Block>(&s.node)) {
            for (const auto& c : b->stmts) emit(*c, out);
            return;
        }
        const int l = s.label;
        if (s.is<Stmt::Skip>()) {
            out.push_back(clone_stmt(s));
            return;
        }
        if (s.is<Stmt::Assert>() || s.is<Stmt::Assume>()) {
            out.push_back(clone_stmt(s));
            // The security property ranges over pairs of complete runs, so
            // the second run's stuck/blocked conditions filter pairs as well.
            // Without the shadow copy a guard can be refuted by a model whose
            // second run never reaches it.
            if (kind_ == ProductKind::Cross) {
                if (auto* as = std::get_if<Stmt::Assert>(&s.node))
                    out.push_back(Stmt::make(Stmt::Assert{Xi(*as->cond)}));
                else
                    out.push_back(Stmt::make(Stmt::Assume{Xi(*std::get_if<Stmt::Assume>(&s.node)->cond)}));
            }
            return;
        }
        if (auto* a = std::get_if<Stmt::Assign>(&s.node)) {
            out.push_back(clone_stmt(s));
            std::vector<std::string> vars;
            expr_vars(*a->rhs, vars);
            bool dep = std::any_of(vars.begin(), vars.end(),
                                   [&](const std::string& v) { return tmap_.scalar_tainted(l, v); });
            ExprPtr rhs;
            if (kind_ == ProductKind::SemiCross)
                rhs = dep ? xi(*a->rhs) : Expr::lit(0);
            else
                rhs = dep ? Xi(*a->rhs) : Expr::var(a->lhs);
            out.push_back(Stmt::make(Stmt::Assign{comp(a->lhs), std::move(rhs)}));
            return;
        }
        if (auto* ld = std::get_if<Stmt::Load>(&s.node)) {
            guard(ld->index, l, SourceKind::LoadIndex, out);
            out.push_back(clone_stmt(s));
            if (tmap_.array_tainted(l, ld->array)) {
                Atom idx = kind_ == ProductKind::SemiCross ? ld->index : comp_atom(ld->index);
                out.push_back(Stmt::make(Stmt::Load{comp(ld->lhs), comp(ld->array), idx}));
            } else if (kind_ == ProductKind::SemiCross) {
                out.push_back(Stmt::make(Stmt::Assign{comp(ld->lhs), Expr::lit(0)}));
            } else {
                out.push_back(Stmt::make(Stmt::Assign{comp(ld->lhs), Expr::var(ld->lhs)}));
            }
            return;
        }
        if (auto* st = std::get_if<Stmt::Store>(&s.node)) {
            guard(st->index, l, SourceKind::StoreIndex, out);
            out.push_back(clone_stmt(s));
            bool val_tainted = !st->value.lit && tmap_.scalar_tainted(l, st->value.var);
            if (kind_ == ProductKind::SemiCross) {
                Atom v = val_tainted ? Atom::make_var(comp(st->value.var)) : Atom::make_lit(0);
                out.push_back(Stmt::make(Stmt::Store{comp(st->array), st->index, v, nullptr, nullptr}));
            } else {
                bool idx_tainted = !st->index.lit && tmap_.scalar_tainted(l, st->index.var);
                Atom v = (val_tainted || idx_tainted) ? comp_atom(st->value) : st->value;
                out.push_back(Stmt::make(Stmt::Store{comp(st->array), comp_atom(st->index), v, nullptr, nullptr}));
            }
            return;
        }
        if (auto* iff = std::get_if<Stmt::If>(&s.node)) {
            guard_var(cond_var(*iff->cond), l, SourceKind::BranchCond, out);
            auto n = Stmt::make(Stmt::If{iff->cond, transform_block(*iff->then_body),
                                         transform_block(*iff->else_body)});
            n->label = l;
            out.push_back(n);
            return;
        }
        if (auto* w = std::get_if<Stmt::While>(&s.node)) {
            const std::string& cv = cond_var(*w->cond);
            std::vector<Predicate> preds;
            for (const auto& inv : w->invariants) preds.push_back({inv, PredStatus::Candidate});
            for (auto& g : gen_invariants(s, kind_, du_)) preds.push_back(std::move(g));

            std::vector<StmtPtr> body;
            guard_var(cv, l, SourceKind::LoopCond, body);  // begin guard
            emit(*w->body, body);

            std::vector<ExprPtr> invs;
            for (const auto& pr : preds) invs.push_back(pr.expr);

            auto n = Stmt::make(Stmt::While{w->cond, Stmt::make(Stmt::Block{std::move(body)}),
                                            std::move(invs)});
            n->label = l;
            out.push_back(n);
            loop_preds_.push_back({n.get(), std::move(preds)});

            guard_var(cv, l, SourceKind::LoopCond, out);  // exit guard
            return;
        }
        if (auto* c = std::get_if<Stmt::Call>(&s.node)) {
            Stmt::Call cc;
            cc.callee = c->callee;
            for (const auto& x : c->lhs) {
                cc.lhs.push_back(x);
                cc.lhs.push_back(comp(x));
            }
            for (const auto& a : c->args) {
                cc.args.push_back(a);
                cc.args.push_back(comp_atom(a));
            }
            auto n = Stmt::make(std::move(cc));
            n->label = l;
            out.push_back(n);
            return;
        }
        throw CtError("product: unexpected statement kind");
    }

    void finalize(ProductProgram& out) {
        std::map<const Stmt*, int> old;
        for (const auto& proc : out.program.procedures)
            for_each_stmt(*proc.body, [&](const Stmt& s) {
                if (!s.is<Stmt::Block>()) old[&s] = s.label;
            });
        assign_labels(out.program);
        for (const auto& proc : out.program.procedures)
            for_each_stmt(*proc.body, [&](const Stmt& s) {
                if (!s.is<Stmt::Block>() && old.at(&s) >= 0) out.orig_label[s.label] = old.at(&s);
            });
        for (const auto& [stmt, src] : guards_) out.guard_index[stmt->label] = src;
        for (auto& [stmt, preds] : loop_preds_) out.candidate_invariants[stmt->label] = std::move(preds);
    }

    const Program& p_;
    const TaintMap& tmap_;
    ProductKind kind_;
    Icfg icfg_;
    DefUse du_;
    std::string copy_tmp_;
    std::vector<std::pair<const Stmt*, Source>> guards_;
    std::vector<std::pair<const Stmt*, std::vector<Predicate>>> loop_preds_;
};

}  // namespace

ProductProgram build_semi_product(const Program& p, const TaintMap& tmap) {
    return ProductBuilder(p, tmap, ProductKind::SemiCross).build();
}

ProductProgram build_cross_product(const Program& p, const TaintMap& tmap) {
    return ProductBuilder(p, tmap, ProductKind::Cross).build();
}

std::string guards_json(const ProductProgram& pp) {
    nlohmann::ordered_json j;
    j["kind"] = product_kind_text(pp.kind);
    auto g = nlohmann::ordered_json::object();
    for (const auto& [label, src] : pp.guard_index) {
        nlohmann::ordered_json e;
        e["source_label"] = src.label;
        e["var"] = src.var;
        e["source_kind"] = source_kind_text(src.kind);
        g[std::to_string(label)] = std::move(e);
    }
    j["guards"] = std::move(g);
    return j.dump(2) + "\n";
}

}  // namespace ctprover
