#include "ctprover/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>

#include "ctprover/errors.hpp"
#include "ctprover/smtlib.hpp"

namespace ctprover {

const char* vc_kind_text(VcKind k) {
    switch (k) {
        case VcKind::GuardValidity: return "guard";
        case VcKind::InvariantInit: return "invariant_init";
        case VcKind::InvariantInductive: return "invariant_inductive";
        case VcKind::UnwindingCheck: return "unwinding";
    }
    return "?";
}

const char* verdict_text(VerdictKind k) {
    switch (k) {
        case VerdictKind::Valid: return "valid";
        case VerdictKind::Invalid: return "invalid";
        case VerdictKind::Unknown: return "unknown";
    }
    return "?";
}

const char* unknown_reason_text(UnknownReason r) {
    switch (r) {
        case UnknownReason::None: return "none";
        case UnknownReason::SolverUnknown: return "solver_unknown";
        case UnknownReason::UnwindBoundHit: return "unwind_bound_hit";
        case UnknownReason::Timeout: return "timeout";
    }
    return "?";
}

namespace {

struct SymState {
    std::map<std::string, TermRef> scalars;
    std::map<std::string, std::vector<TermRef>> arrays;  // root arrays only
    std::map<std::string, std::string> bind;             // array param -> root
    TermRef pc = nullptr;
};

const std::string& resolve_root(const SymState& st, const std::string& name) {
    auto it = st.bind.find(name);
    return it == st.bind.end() ? name : it->second;
}

class VcGen {
public:
    VcGen(const ProductProgram& pp, int width, const VcConfig& cfg)
        : pp_(pp), prog_(pp.program), cfg_(cfg),
          tb_(std::make_shared<TermBuilder>(width)) {}

    VcSet run() {
        const Procedure& entry = prog_.entry_proc();
        SymState st;
        st.pc = tb_->true_();
        // Interpreter model: one global frame, every scalar zero at startup,
        // local arrays zero-filled. Entry parameters become free symbols.
        for (const auto& proc : prog_.procedures) {
            for (const auto& l : proc.locals) st.scalars[l] = tb_->constant(0);
            for (const auto& p : proc.params)
                if (!p.is_array) st.scalars[p.name] = tb_->constant(0);
            for (const auto& a : proc.local_arrays)
                st.arrays[a.name].assign(a.length, tb_->constant(0));
        }
        for (const auto& p : entry.params) {
            if (p.is_array) {
                auto& slots = st.arrays[p.name];
                slots.clear();
                for (uint64_t i = 0; i < p.length; i++)
                    slots.push_back(tb_->sym(p.name + "." + std::to_string(i)));
            } else {
                st.scalars[p.name] = tb_->sym(p.name);
            }
        }
        exec(*entry.body, st, entry);
        return {tb_, std::move(vcs_)};
    }

private:
    struct Assumption {
        TermRef t;  // {0,1}-valued conjunct
        std::set<std::string> syms;
    };

    const ProductProgram& pp_;
    const Program& prog_;
    const VcConfig& cfg_;
    std::shared_ptr<TermBuilder> tb_;
    std::vector<Vc> vcs_;
    std::vector<Assumption> assms_;
    bool path_unsat_ = false;  // an unconditional assumption folded to false
    uint64_t steps_ = 0;
    int havoc_counter_ = 0;
    int vc_id_ = 0;

    TermRef truth(TermRef t) { return tb_->ne(t, tb_->constant(0)); }

    void assume01(TermRef pc, TermRef fact01) {
        TermRef t = tb_->or_(tb_->bool_not(pc), fact01);
        if (t == tb_->true_()) return;
        if (t->is_const()) {
            path_unsat_ = true;
            return;
        }
        assms_.push_back({t, term_syms(t)});
    }

    // Obligation must hold; the violation formula conjoins the goal with the
    // assumptions sharing symbols with it (transitively). Dropping disjoint
    // assumptions only weakens premises, which is sound for every use here.
    void emit_vc(VcKind kind, int assert_id, int candidate, TermRef pc, TermRef obligation01) {
        TermRef goal = tb_->and_(pc, tb_->bool_not(obligation01));
        Vc vc{vc_id_++, kind, assert_id, candidate, tb_->false_()};
        if (!path_unsat_ && goal != tb_->false_()) {
            std::set<std::string> cone = term_syms(goal);
            std::vector<char> used(assms_.size(), 0);
            bool grew = true;
            while (grew) {
                grew = false;
                for (size_t i = 0; i < assms_.size(); i++) {
                    if (used[i]) continue;
                    bool hit = false;
                    for (const auto& s : assms_[i].syms)
                        if (cone.count(s)) {
                            hit = true;
                            break;
                        }
                    if (!hit) continue;
                    used[i] = 1;
                    cone.insert(assms_[i].syms.begin(), assms_[i].syms.end());
                    grew = true;
                }
            }
            TermRef viol = goal;
            for (size_t i = 0; i < assms_.size(); i++)
                if (used[i]) viol = tb_->and_(assms_[i].t, viol);
            vc.violation = viol;
        }
        vcs_.push_back(vc);
    }

    TermRef atom_term(const Atom& a, const SymState& st) {
        if (a.lit) return tb_->constant(a.value);
        auto it = st.scalars.find(a.var);
        if (it == st.scalars.end())
            throw CtError("verifier: unknown scalar '" + a.var + "'");
        return it->second;
    }

    TermRef ev(const Expr& e, SymState& st) {
        if (e.is_lit()) return tb_->constant(e.lit_value());
        if (e.is_var()) {
            auto it = st.scalars.find(e.var_name());
            if (it == st.scalars.end())
                throw CtError("verifier: unknown scalar '" + e.var_name() + "'");
            return it->second;
        }
        if (auto* b = std::get_if<Expr::Bin>(&e.node)) {
            TermRef l = ev(*b->lhs, st);
            TermRef r = ev(*b->rhs, st);
            if (b->op == BinOp::Div || b->op == BinOp::Mod)
                assume01(st.pc, tb_->ne(r, tb_->constant(0)));
            return tb_->bin(b->op, l, r);
        }
        if (auto* u = std::get_if<Expr::Un>(&e.node))
            return tb_->un(u->op, ev(*u->arg, st));
        throw CtError("verifier: expression is not normalized (array read)");
    }

    std::vector<TermRef>& slots_of(SymState& st, const std::string& array) {
        const std::string& root = resolve_root(st, array);
        auto it = st.arrays.find(root);
        if (it == st.arrays.end())
            throw CtError("verifier: array '" + array + "' has no binding");
        return it->second;
    }

    void bound_index(SymState& st, TermRef idx, size_t len) {
        // Complete executions stay in bounds; lengths covering the whole
        // index space need no side condition.
        if (len <= tb_->mask())
            assume01(st.pc, tb_->app(TermOp::Lt, idx, tb_->constant(len)));
    }

    void step_budget() {
        if (++steps_ > cfg_.inline_cap)
            throw InlineBlowupError("verifier: statement budget exceeded (" +
                                    std::to_string(cfg_.inline_cap) + ")");
    }

    void merge(SymState& st, TermRef c, const SymState& a, const SymState& b) {
        for (const auto& [k, va] : a.scalars) {
            TermRef vb = b.scalars.at(k);
            st.scalars[k] = va == vb ? va : tb_->ite(c, va, vb);
        }
        for (const auto& [k, sa] : a.arrays) {
            const auto& sb = b.arrays.at(k);
            auto& dst = st.arrays[k];
            dst.resize(sa.size());
            for (size_t i = 0; i < sa.size(); i++)
                dst[i] = sa[i] == sb[i] ? sa[i] : tb_->ite(c, sa[i], sb[i]);
        }
        st.bind = a.bind;  // bindings are re-established before every use
    }

    // Scalars and array roots the loop body can modify, for havocking.
    void collect_mods(const Stmt& s, const Procedure& owner, SymState& st,
                      std::set<std::string>& scal, std::set<std::string>& roots) {
        if (s.is<Stmt::Block>()) {
            for (const auto& c : s.as<Stmt::Block>().stmts)
                collect_mods(*c, owner, st, scal, roots);
            return;
        }
        if (s.is<Stmt::Assign>()) {
            scal.insert(s.as<Stmt::Assign>().lhs);
            return;
        }
        if (s.is<Stmt::Load>()) {
            scal.insert(s.as<Stmt::Load>().lhs);
            return;
        }
        if (s.is<Stmt::Store>()) {
            roots.insert(resolve_root(st, s.as<Stmt::Store>().array));
            return;
        }
        if (s.is<Stmt::If>()) {
            const auto& f = s.as<Stmt::If>();
            collect_mods(*f.then_body, owner, st, scal, roots);
            collect_mods(*f.else_body, owner, st, scal, roots);
            return;
        }
        if (s.is<Stmt::While>()) {
            collect_mods(*s.as<Stmt::While>().body, owner, st, scal, roots);
            return;
        }
        if (s.is<Stmt::Call>()) {
            const auto& c = s.as<Stmt::Call>();
            const Procedure* callee = prog_.find_proc(c.callee);
            if (!callee) throw CtError("verifier: unknown procedure '" + c.callee + "'");
            for (const auto& l : c.lhs) scal.insert(l);
            // Bind arrays the way the call will, then record everything the
            // callee touches; the call graph is acyclic.
            SymState inner;
            inner.bind = st.bind;
            for (size_t i = 0; i < c.args.size(); i++)
                if (callee->params[i].is_array)
                    inner.bind[callee->params[i].name] = resolve_root(st, c.args[i].var);
                else
                    scal.insert(callee->params[i].name);
            collect_mods(*callee->body, *callee, inner, scal, roots);
            return;
        }
    }

    void havoc(SymState& st, const std::set<std::string>& scal,
               const std::set<std::string>& roots) {
        std::string tag = "!" + std::to_string(havoc_counter_++);
        for (const auto& v : scal) {
            if (st.scalars.count(v)) st.scalars[v] = tb_->sym(v + tag);
        }
        for (const auto& r : roots) {
            auto it = st.arrays.find(r);
            if (it == st.arrays.end()) continue;
            for (size_t i = 0; i < it->second.size(); i++)
                it->second[i] = tb_->sym(r + "." + std::to_string(i) + tag);
        }
    }

    // Candidate expressions may be arbitrary user text; a candidate that
    // cannot be evaluated gets a trivially false obligation and is pruned.
    TermRef inv_term(const ExprPtr& e, SymState& st) {
        try {
            return truth(ev(*e, st));
        } catch (const CtError&) {
            return tb_->false_();
        }
    }

    const std::vector<int>* live_at(int label) const {
        auto it = cfg_.live.find(label);
        return it == cfg_.live.end() ? nullptr : &it->second;
    }

    void exec_while_invariant(const Stmt& s, SymState& st, const Procedure& owner) {
        const auto& w = s.as<Stmt::While>();
        const std::vector<int>* live = live_at(s.label);
        const std::vector<Predicate>* preds = nullptr;
        auto pit = pp_.candidate_invariants.find(s.label);
        if (pit != pp_.candidate_invariants.end()) preds = &pit->second;

        auto inv_expr = [&](int ci) -> const ExprPtr& {
            return (*preds)[static_cast<size_t>(ci)].expr;
        };

        if (live && preds)
            for (int ci : *live)
                emit_vc(VcKind::InvariantInit, s.label, ci, st.pc, inv_term(inv_expr(ci), st));

        std::set<std::string> scal, roots;
        collect_mods(*w.body, owner, st, scal, roots);

        havoc(st, scal, roots);
        if (live && preds)
            for (int ci : *live) assume01(st.pc, inv_term(inv_expr(ci), st));
        TermRef c = truth(ev(*w.cond, st));
        SymState body_st = st;
        body_st.pc = tb_->and_(st.pc, c);
        exec(*w.body, body_st, owner);
        if (live && preds)
            for (int ci : *live)
                emit_vc(VcKind::InvariantInductive, s.label, ci, body_st.pc,
                        inv_term(inv_expr(ci), body_st));

        havoc(st, scal, roots);
        if (live && preds)
            for (int ci : *live) assume01(st.pc, inv_term(inv_expr(ci), st));
        TermRef c_exit = truth(ev(*w.cond, st));
        assume01(st.pc, tb_->bool_not(c_exit));
    }

    void exec_while_bmc(const Stmt& s, SymState& st, const Procedure& owner, int remaining) {
        const auto& w = s.as<Stmt::While>();
        TermRef c = truth(ev(*w.cond, st));
        if (c == tb_->false_()) return;
        if (remaining == 0) {
            emit_vc(VcKind::UnwindingCheck, s.label, -1, st.pc, tb_->bool_not(c));
            assume01(st.pc, tb_->bool_not(c));
            return;
        }
        if (c == tb_->true_()) {
            exec(*w.body, st, owner);
            exec_while_bmc(s, st, owner, remaining - 1);
            return;
        }
        SymState st_t = st;
        st_t.pc = tb_->and_(st.pc, c);
        exec(*w.body, st_t, owner);
        exec_while_bmc(s, st_t, owner, remaining - 1);
        st_t.pc = st.pc;
        merge(st, c, st_t, st);
    }

    void exec(const Stmt& s, SymState& st, const Procedure& owner) {
        if (s.is<Stmt::Block>()) {
            for (const auto& c : s.as<Stmt::Block>().stmts) exec(*c, st, owner);
            return;
        }
        step_budget();
        if (s.is<Stmt::Skip>()) return;
        if (s.is<Stmt::Assign>()) {
            const auto& a = s.as<Stmt::Assign>();
            st.scalars[a.lhs] = ev(*a.rhs, st);
            return;
        }
        if (s.is<Stmt::Load>()) {
            const auto& l = s.as<Stmt::Load>();
            auto& slots = slots_of(st, l.array);
            if (slots.empty()) {
                assume01(st.pc, tb_->false_());
                st.scalars[l.lhs] = tb_->constant(0);
                return;
            }
            if (l.index.lit) {
                if (l.index.value < slots.size()) {
                    st.scalars[l.lhs] = slots[l.index.value];
                } else {
                    assume01(st.pc, tb_->false_());
                    st.scalars[l.lhs] = tb_->constant(0);
                }
                return;
            }
            TermRef idx = atom_term(l.index, st);
            bound_index(st, idx, slots.size());
            size_t reach = std::min<uint64_t>(slots.size(), tb_->mask() + 1);
            TermRef acc = slots[reach - 1];
            for (size_t j = reach - 1; j-- > 0;)
                acc = tb_->ite(tb_->eq(idx, tb_->constant(j)), slots[j], acc);
            st.scalars[l.lhs] = acc;
            return;
        }
        if (s.is<Stmt::Store>()) {
            const auto& t = s.as<Stmt::Store>();
            auto& slots = slots_of(st, t.array);
            TermRef val = atom_term(t.value, st);
            if (slots.empty()) {
                assume01(st.pc, tb_->false_());
                return;
            }
            if (t.index.lit) {
                if (t.index.value < slots.size())
                    slots[t.index.value] = val;
                else
                    assume01(st.pc, tb_->false_());
                return;
            }
            TermRef idx = atom_term(t.index, st);
            bound_index(st, idx, slots.size());
            size_t reach = std::min<uint64_t>(slots.size(), tb_->mask() + 1);
            for (size_t j = 0; j < reach; j++)
                slots[j] = tb_->ite(tb_->eq(idx, tb_->constant(j)), val, slots[j]);
            return;
        }
        if (s.is<Stmt::Assert>()) {
            TermRef t = truth(ev(*s.as<Stmt::Assert>().cond, st));
            // Guards observe the pair of original executions and must not
            // constrain the path: assuming a refuted guard would vacuously
            // validate every guard after it, and refinement would then drop
            // a genuinely leaking source. User asserts stick the run, so for
            // them check-then-assume is the real semantics.
            if (pp_.guard_index.count(s.label))
                emit_vc(VcKind::GuardValidity, s.label, -1, st.pc, t);
            else
                assume01(st.pc, t);
            return;
        }
        if (s.is<Stmt::Assume>()) {
            assume01(st.pc, truth(ev(*s.as<Stmt::Assume>().cond, st)));
            return;
        }
        if (s.is<Stmt::If>()) {
            const auto& f = s.as<Stmt::If>();
            TermRef c = truth(ev(*f.cond, st));
            if (c == tb_->true_()) {
                exec(*f.then_body, st, owner);
                return;
            }
            if (c == tb_->false_()) {
                exec(*f.else_body, st, owner);
                return;
            }
            SymState st_t = st;
            st_t.pc = tb_->and_(st.pc, c);
            exec(*f.then_body, st_t, owner);
            SymState st_e = st;
            st_e.pc = tb_->and_(st.pc, tb_->bool_not(c));
            exec(*f.else_body, st_e, owner);
            merge(st, c, st_t, st_e);
            return;
        }
        if (s.is<Stmt::While>()) {
            if (cfg_.mode == VcMode::Invariant)
                exec_while_invariant(s, st, owner);
            else
                exec_while_bmc(s, st, owner, cfg_.unroll);
            return;
        }
        if (s.is<Stmt::Call>()) {
            const auto& c = s.as<Stmt::Call>();
            const Procedure* callee = prog_.find_proc(c.callee);
            if (!callee) throw CtError("verifier: unknown procedure '" + c.callee + "'");
            for (size_t i = 0; i < c.args.size(); i++) {
                const Param& p = callee->params[i];
                if (p.is_array)
                    st.bind[p.name] = resolve_root(st, c.args[i].var);
                else
                    st.scalars[p.name] = atom_term(c.args[i], st);
            }
            exec(*callee->body, st, *callee);
            for (size_t i = 0; i < c.lhs.size(); i++)
                st.scalars[c.lhs[i]] = st.scalars.at(callee->returns[i]);
            return;
        }
        throw CtError("verifier: unhandled statement kind");
    }
};

}  // namespace

VcSet gen_vcs(const ProductProgram& pp, int width, const VcConfig& cfg) {
    return VcGen(pp, width, cfg).run();
}

namespace {

// A VC compiled to a flat postorder program for fast repeated evaluation.
struct FlatVc {
    struct Node {
        TermOp op;
        uint64_t value = 0;
        int a = -1, b = -1, c = -1;
        int sym_slot = -1;
    };
    std::vector<Node> nodes;         // root last
    std::vector<std::string> syms;   // slot order, sorted
};

FlatVc flatten(TermRef root) {
    FlatVc f;
    std::map<TermRef, int> index;
    std::map<std::string, int> sym_slot;
    std::set<TermRef> opened;
    std::vector<std::pair<TermRef, bool>> stack{{root, false}};
    while (!stack.empty()) {
        auto [t, expanded] = stack.back();
        stack.pop_back();
        if (expanded) {
            FlatVc::Node n;
            n.op = t->op;
            n.value = t->value;
            if (t->is_sym()) {
                auto it = sym_slot.find(t->sym);
                if (it == sym_slot.end()) {
                    it = sym_slot.emplace(t->sym, static_cast<int>(f.syms.size())).first;
                    f.syms.push_back(t->sym);
                }
                n.sym_slot = it->second;
            }
            int ar = term_op_arity(t->op);
            if (ar >= 1) n.a = index.at(t->args[0]);
            if (ar >= 2) n.b = index.at(t->args[1]);
            if (ar >= 3) n.c = index.at(t->args[2]);
            index[t] = static_cast<int>(f.nodes.size());
            f.nodes.push_back(n);
            continue;
        }
        if (!opened.insert(t).second) continue;
        stack.emplace_back(t, true);
        for (int i = term_op_arity(t->op) - 1; i >= 0; i--)
            stack.emplace_back(t->args[i], false);
    }
    return f;
}

uint64_t flat_eval(const FlatVc& f, const std::vector<uint64_t>& sym_vals,
                   std::vector<uint64_t>& regs, int width) {
    regs.resize(f.nodes.size());
    for (size_t i = 0; i < f.nodes.size(); i++) {
        const auto& n = f.nodes[i];
        if (n.op == TermOp::Const)
            regs[i] = n.value;
        else if (n.op == TermOp::Sym)
            regs[i] = sym_vals[n.sym_slot];
        else
            regs[i] = term_apply(n.op, n.a >= 0 ? regs[n.a] : 0, n.b >= 0 ? regs[n.b] : 0,
                                 n.c >= 0 ? regs[n.c] : 0, width);
    }
    return regs.back();
}

Verdict enumerate_vc(const TermBuilder& tb, const Vc& vc, const BackendConfig& be) {
    const int width = tb.width();
    const uint64_t mask = tb.mask();
    FlatVc f = flatten(vc.violation);
    const size_t k = f.syms.size();

    // full space size, clamped to the cap
    uint64_t total = 1;
    bool exhaustive = true;
    if (width == 64 && k > 0) exhaustive = false;
    for (size_t i = 0; exhaustive && i < k; i++) {
        if (total > be.enum_cap / (mask + 1)) {
            exhaustive = false;
            break;
        }
        total *= mask + 1;
    }

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(be.timeout_vc));
    std::vector<uint64_t> vals(k, 0), regs;
    auto model_of = [&]() {
        TermEnv m;
        for (size_t i = 0; i < k; i++) m[f.syms[i]] = vals[i];
        return m;
    };

    if (exhaustive) {
        uint64_t done = 0;
        while (true) {
            if (flat_eval(f, vals, regs, width) != 0)
                return {VerdictKind::Invalid, model_of(), UnknownReason::None};
            if (++done == total) break;
            if ((done & 0xfff) == 0 && std::chrono::steady_clock::now() > deadline)
                return {VerdictKind::Unknown, {}, UnknownReason::Timeout};
            for (size_t i = 0; i < k; i++) {
                vals[i] = (vals[i] + 1) & mask;
                if (vals[i] != 0) break;
            }
        }
        return {VerdictKind::Valid, {}, UnknownReason::None};
    }

    std::mt19937_64 rng(be.enum_seed);
    for (uint64_t iter = 0; iter < be.enum_cap; iter++) {
        for (size_t i = 0; i < k; i++) vals[i] = rng() & mask;
        if (flat_eval(f, vals, regs, width) != 0)
            return {VerdictKind::Invalid, model_of(), UnknownReason::None};
        if ((iter & 0xfff) == 0 && std::chrono::steady_clock::now() > deadline)
            return {VerdictKind::Unknown, {}, UnknownReason::Timeout};
    }
    return {VerdictKind::Unknown, {}, UnknownReason::UnwindBoundHit};
}

}  // namespace

Verdict check_vc(const TermBuilder& tb, const Vc& vc, const BackendConfig& be) {
    if (vc.violation->is_const()) {
        if (vc.violation->value == 0) return {VerdictKind::Valid, {}, UnknownReason::None};
        // trivially violated under any input
        return {VerdictKind::Invalid, {}, UnknownReason::None};
    }
    if (!be.emit_dir.empty()) {
        std::filesystem::create_directories(be.emit_dir);
        // assert id first so all conditions of one guard glob together
        std::ofstream out(std::filesystem::path(be.emit_dir) /
                          ("vc_" + std::to_string(vc.assert_id) + "_" + std::to_string(vc.id) +
                           ".smt2"));
        out << smtlib_text(tb, vc.violation);
    }
    if (be.solver_cmd.empty()) return enumerate_vc(tb, vc, be);

    SolverResult r = run_solver(be.solver_cmd, smtlib_text(tb, vc.violation), be.timeout_vc);
    switch (r.status) {
        case SolverStatus::Unsat:
            return {VerdictKind::Valid, {}, UnknownReason::None};
        case SolverStatus::Sat: {
            TermEnv m;
            for (auto& [k, v] : r.model) m[k] = v & tb.mask();
            return {VerdictKind::Invalid, m, UnknownReason::None};
        }
        case SolverStatus::Unknown:
            break;
    }
    return {VerdictKind::Unknown, {},
            r.detail == "timeout" ? UnknownReason::Timeout : UnknownReason::SolverUnknown};
}

namespace {

std::map<int, std::vector<int>> live_candidates(const ProductProgram& pp, bool confirmed_only) {
    std::map<int, std::vector<int>> live;
    for (const auto& [label, preds] : pp.candidate_invariants) {
        std::vector<int> idx;
        for (size_t i = 0; i < preds.size(); i++) {
            if (preds[i].status == PredStatus::Dropped) continue;
            if (confirmed_only && preds[i].status != PredStatus::Confirmed) continue;
            idx.push_back(static_cast<int>(i));
        }
        if (!idx.empty()) live[label] = std::move(idx);
    }
    return live;
}

struct Budget {
    std::chrono::steady_clock::time_point deadline;
    bool limited = false;

    explicit Budget(double seconds) {
        if (seconds > 0) {
            limited = true;
            deadline = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(seconds));
        }
    }
    bool exhausted() const {
        return limited && std::chrono::steady_clock::now() > deadline;
    }
};

}  // namespace

ProductProgram prune_invariants(const ProductProgram& pp, const VerifyConfig& cfg) {
    ProductProgram out = pp;
    Budget budget(cfg.budget_s);
    bool changed = true;
    while (changed) {
        changed = false;
        VcConfig vcc;
        vcc.mode = VcMode::Invariant;
        vcc.unroll = cfg.unroll;
        vcc.inline_cap = cfg.inline_cap;
        vcc.live = live_candidates(out, false);
        if (vcc.live.empty()) break;

        VcSet vs;
        try {
            vs = gen_vcs(out, cfg.width, vcc);
        } catch (const InlineBlowupError&) {
            for (auto& [label, preds] : out.candidate_invariants)
                for (auto& p : preds) p.status = PredStatus::Dropped;
            return out;
        }
        std::set<std::pair<int, int>> failed;
        for (const auto& vc : vs.vcs) {
            if (vc.kind != VcKind::InvariantInit && vc.kind != VcKind::InvariantInductive)
                continue;
            if (failed.count({vc.assert_id, vc.candidate})) continue;
            if (budget.exhausted()) {
                failed.insert({vc.assert_id, vc.candidate});
                continue;
            }
            Verdict v = check_vc(*vs.tb, vc, cfg.backend);
            if (v.kind != VerdictKind::Valid) failed.insert({vc.assert_id, vc.candidate});
        }
        for (const auto& [label, ci] : failed) {
            out.candidate_invariants.at(label)[static_cast<size_t>(ci)].status =
                PredStatus::Dropped;
            changed = true;
        }
    }
    for (auto& [label, preds] : out.candidate_invariants)
        for (auto& p : preds)
            if (p.status == PredStatus::Candidate) p.status = PredStatus::Confirmed;
    return out;
}

std::map<int, Verdict> verify_guards(const ProductProgram& pp, const VerifyConfig& cfg) {
    std::map<int, Verdict> out;
    for (const auto& [label, src] : pp.guard_index)
        out[label] = {VerdictKind::Unknown, {}, UnknownReason::SolverUnknown};
    Budget budget(cfg.budget_s);

    // Proof pass: invariant-mode with the confirmed candidates assumed.
    VcConfig inv;
    inv.mode = VcMode::Invariant;
    inv.unroll = cfg.unroll;
    inv.inline_cap = cfg.inline_cap;
    inv.live = live_candidates(pp, true);
    try {
        VcSet vs = gen_vcs(pp, cfg.width, inv);
        std::map<int, bool> all_valid;
        for (const auto& vc : vs.vcs) {
            if (vc.kind != VcKind::GuardValidity) continue;
            auto it = all_valid.emplace(vc.assert_id, true).first;
            if (!it->second) continue;
            if (budget.exhausted()) {
                it->second = false;
                out[vc.assert_id].reason = UnknownReason::Timeout;
                continue;
            }
            Verdict v = check_vc(*vs.tb, vc, cfg.backend);
            if (v.kind != VerdictKind::Valid) {
                it->second = false;
                if (v.kind == VerdictKind::Unknown) out[vc.assert_id].reason = v.reason;
            }
        }
        for (const auto& [label, ok] : all_valid)
            if (ok) out[label] = {VerdictKind::Valid, {}, UnknownReason::None};
    } catch (const InlineBlowupError&) {
        for (auto& [label, v] : out)
            if (v.kind == VerdictKind::Unknown) v.reason = UnknownReason::UnwindBoundHit;
    }

    std::set<int> unresolved;
    for (const auto& [label, v] : out)
        if (v.kind != VerdictKind::Valid) unresolved.insert(label);
    if (unresolved.empty()) return out;

    // Counterexample pass: bounded unrolling; models bind entry parameters.
    VcConfig bmc;
    bmc.mode = VcMode::Bmc;
    bmc.unroll = cfg.unroll;
    bmc.inline_cap = cfg.inline_cap;
    try {
        VcSet vs = gen_vcs(pp, cfg.width, bmc);
        bool all_unwound = true;
        UnknownReason unwind_reason = UnknownReason::UnwindBoundHit;
        for (const auto& vc : vs.vcs) {
            if (vc.kind != VcKind::UnwindingCheck) continue;
            if (budget.exhausted()) {
                all_unwound = false;
                unwind_reason = UnknownReason::Timeout;
                break;
            }
            Verdict v = check_vc(*vs.tb, vc, cfg.backend);
            if (v.kind != VerdictKind::Valid) {
                all_unwound = false;
                if (v.kind == VerdictKind::Unknown && v.reason == UnknownReason::Timeout)
                    unwind_reason = UnknownReason::Timeout;
            }
        }
        std::map<int, Verdict> agg;
        for (const auto& vc : vs.vcs) {
            if (vc.kind != VcKind::GuardValidity || !unresolved.count(vc.assert_id)) continue;
            auto it = agg.emplace(vc.assert_id, Verdict{VerdictKind::Valid, {}, UnknownReason::None})
                          .first;
            if (it->second.kind == VerdictKind::Invalid) continue;
            if (budget.exhausted()) {
                if (it->second.kind == VerdictKind::Valid)
                    it->second = {VerdictKind::Unknown, {}, UnknownReason::Timeout};
                continue;
            }
            Verdict v = check_vc(*vs.tb, vc, cfg.backend);
            if (v.kind == VerdictKind::Invalid) {
                it->second = v;  // first counterexample wins, deterministic order
            } else if (v.kind == VerdictKind::Unknown &&
                       it->second.kind == VerdictKind::Valid) {
                it->second = v;
            }
        }
        for (int label : unresolved) {
            auto it = agg.find(label);
            if (it == agg.end()) {
                // no occurrence reached: vacuously valid when fully unwound
                if (all_unwound) out[label] = {VerdictKind::Valid, {}, UnknownReason::None};
                else out[label] = {VerdictKind::Unknown, {}, unwind_reason};
                continue;
            }
            Verdict& v = it->second;
            if (v.kind == VerdictKind::Invalid)
                out[label] = v;
            else if (v.kind == VerdictKind::Valid && all_unwound)
                out[label] = {VerdictKind::Valid, {}, UnknownReason::None};
            else if (v.kind == VerdictKind::Valid)
                out[label] = {VerdictKind::Unknown, {}, unwind_reason};
            else
                out[label] = v;
        }
    } catch (const InlineBlowupError&) {
        for (int label : unresolved)
            if (out[label].kind == VerdictKind::Unknown)
                out[label].reason = UnknownReason::UnwindBoundHit;
    }
    return out;
}

ReplayResult witness_replay(const Program& original, const ProductProgram& pp,
                            const TermEnv& model, int width) {
    if (pp.kind != ProductKind::Cross)
        throw CtError("witness_replay: only cross-product models are leak witnesses");
    const uint64_t mask = width == 64 ? ~0ull : (1ull << width) - 1;
    const Procedure& pe = pp.program.entry_proc();
    const Procedure& oe = original.entry_proc();

    auto has_param = [&](const std::string& n) {
        for (const auto& p : pe.params)
            if (p.name == n) return true;
        return false;
    };
    auto val = [&](const std::string& n) {
        auto it = model.find(n);
        return it == model.end() ? 0 : it->second & mask;
    };

    ReplayResult r;
    for (const auto& p : oe.params) {
        std::string sh = companion_name(p.name, ProductKind::Cross);
        bool shadowed = has_param(sh);
        if (!p.is_array) {
            r.in1.scalars[p.name] = val(p.name);
            r.in2.scalars[p.name] = shadowed ? val(sh) : val(p.name);
        } else {
            auto& a1 = r.in1.arrays[p.name];
            auto& a2 = r.in2.arrays[p.name];
            for (uint64_t i = 0; i < p.length; i++) {
                std::string slot = p.name + "." + std::to_string(i);
                a1.push_back(val(slot));
                a2.push_back(shadowed ? val(sh + "." + std::to_string(i)) : val(slot));
            }
        }
    }

    Interpreter interp(original, width);
    RunResult r1 = interp.run(r.in1);
    RunResult r2 = interp.run(r.in2);
    r.trace1 = r1.trace;
    r.trace2 = r2.trace;
    if (r1.status != RunStatus::Complete || r2.status != RunStatus::Complete) {
        r.reason = "a run did not complete";
        return r;
    }
    size_t i = 0;
    while (i < r1.trace.size() && i < r2.trace.size() && r1.trace[i] == r2.trace[i]) i++;
    if (i == r1.trace.size() && i == r2.trace.size()) {
        r.reason = "traces agree";
        return r;
    }
    r.confirmed = true;
    r.divergence = i;
    return r;
}

}  // namespace ctprover
