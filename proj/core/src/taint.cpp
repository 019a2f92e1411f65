#include "ctprover/taint.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "ctprover/errors.hpp"
#include "ctprover/interp.hpp"

namespace ctprover {

std::string fact_set_text(const FactSet& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& f : s) {
        if (!first) out += ", ";
        first = false;
        out += f.name;
        if (f.array) out += "[]";
    }
    out += "}";
    return out;
}

static const FactSet kEmptyFacts;

const FactSet& TaintMap::at_label(int label) const {
    auto it = at.find(label);
    return it == at.end() ? kEmptyFacts : it->second;
}

bool TaintMap::scalar_tainted(int label, const std::string& var) const {
    return at_label(label).count(scalar_fact(var)) > 0;
}

bool TaintMap::array_tainted(int label, const std::string& arr) const {
    return at_label(label).count(array_fact(arr)) > 0;
}

FactSet entry_seed(const Program& p) {
    FactSet seed;
    for (const auto& prm : split_entry_params(p).secret_params)
        seed.insert(prm.is_array ? array_fact(prm.name) : scalar_fact(prm.name));
    return seed;
}

TaintMap all_tainted(const Program& p) {
    TaintMap m;
    for (const auto& proc : p.procedures) {
        FactSet everything;
        for (const auto& prm : proc.params)
            everything.insert(prm.is_array ? array_fact(prm.name) : scalar_fact(prm.name));
        for (const auto& v : proc.locals) everything.insert(scalar_fact(v));
        for (const auto& a : proc.local_arrays) everything.insert(array_fact(a.name));
        for_each_stmt(*proc.body, [&](const Stmt& s) {
            if (s.label >= 0) m.at[s.label] = everything;
        });
    }
    return m;
}

TaintEvaluator::TaintEvaluator(const Program& p) : p_(p) {}

void TaintEvaluator::record(int label, const FactSet& t) {
    if (label < 0) return;
    at_[label].insert(t.begin(), t.end());
}

FactSet TaintEvaluator::transfer(const Stmt& s, const FactSet& t) {
    if (auto* b = std::get_if<Stmt::Block>(&s.node)) {
        FactSet cur = t;
        for (const auto& c : b->stmts) cur = transfer(*c, cur);
        return cur;
    }
    record(s.label, t);
    if (auto* a = std::get_if<Stmt::Assign>(&s.node)) {
        std::vector<std::string> vars;
        expr_vars(*a->rhs, vars);
        bool tainted = std::any_of(vars.begin(), vars.end(), [&](const std::string& v) {
            return t.count(scalar_fact(v)) > 0;
        });
        FactSet r = t;
        if (tainted)
            r.insert(scalar_fact(a->lhs));
        else
            r.erase(scalar_fact(a->lhs));
        return r;
    }
    if (auto* l = std::get_if<Stmt::Load>(&s.node)) {
        FactSet r = t;
        if (t.count(array_fact(l->array)))
            r.insert(scalar_fact(l->lhs));
        else
            r.erase(scalar_fact(l->lhs));
        return r;
    }
    if (auto* st = std::get_if<Stmt::Store>(&s.node)) {
        FactSet r = t;
        if (!st->value.lit && t.count(scalar_fact(st->value.var)))
            r.insert(array_fact(st->array));  // weak update: arrays never untaint
        return r;
    }
    if (auto* i = std::get_if<Stmt::If>(&s.node)) {
        FactSet a = transfer(*i->then_body, t);
        FactSet b2 = transfer(*i->else_body, t);
        a.insert(b2.begin(), b2.end());
        return a;
    }
    if (auto* w = std::get_if<Stmt::While>(&s.node)) {
        FactSet u = lfp(*w->body, t);
        record(s.label, u);
        return u;
    }
    if (auto* c = std::get_if<Stmt::Call>(&s.node)) return transfer_call(*c, s.label, t);
    return t;  // Skip, Assert, Assume
}

FactSet TaintEvaluator::lfp(const Stmt& body, const FactSet& t) {
    FactSet u = t;
    int passes = 0;
    for (;;) {
        ++passes;
        FactSet after = transfer(body, u);
        FactSet next = u;
        next.insert(after.begin(), after.end());
        if (next == u) break;
        u = std::move(next);
    }
    max_lfp_passes_ = std::max(max_lfp_passes_, passes);
    return u;
}

FactSet TaintEvaluator::transfer_call(const Stmt::Call& c, int, const FactSet& t) {
    const Procedure* callee = p_.find_proc(c.callee);
    FactSet tin;
    for (size_t i = 0; i < c.args.size(); ++i) {
        const Param& prm = callee->params[i];
        if (prm.is_array) {
            if (t.count(array_fact(c.args[i].var))) tin.insert(array_fact(prm.name));
        } else if (!c.args[i].lit && t.count(scalar_fact(c.args[i].var))) {
            tin.insert(scalar_fact(prm.name));
        }
    }
    auto key = std::make_pair(c.callee, tin);
    auto it = summaries_.find(key);
    if (it == summaries_.end()) {
        FactSet exit = transfer(*callee->body, tin);
        FactSet proj;
        for (const auto& r : callee->returns)
            if (exit.count(scalar_fact(r))) proj.insert(scalar_fact(r));
        for (const auto& prm : callee->params)
            if (prm.is_array && exit.count(array_fact(prm.name))) proj.insert(array_fact(prm.name));
        it = summaries_.emplace(key, std::move(proj)).first;
    }
    const FactSet& tout = it->second;
    FactSet r = t;
    for (const auto& lhs : c.lhs) r.erase(scalar_fact(lhs));
    for (size_t i = 0; i < callee->returns.size(); ++i)
        if (tout.count(scalar_fact(callee->returns[i]))) r.insert(scalar_fact(c.lhs[i]));
    for (size_t i = 0; i < c.args.size(); ++i)
        if (callee->params[i].is_array && tout.count(array_fact(callee->params[i].name)))
            r.insert(array_fact(c.args[i].var));
    return r;
}

TaintMap TaintEvaluator::analyze() {
    at_.clear();
    summaries_.clear();
    transfer(*p_.entry_proc().body, entry_seed(p_));
    TaintMap m;
    m.at = at_;
    return m;
}

namespace {

// One context-sensitive analysis of a procedure: taint bits over scalar
// definition sites and array events, driven along def-use chains.
class SparseEngine {
public:
    SparseEngine(const Program& p, const Icfg& g, const DefUse& du) : p_(p), g_(g), du_(du) {}

    TaintMap run() {
        FactSet seed = entry_seed(p_);
        instance(p_.entry, seed);
        TaintMap m;
        for (const auto& [key, inst] : instances_) materialize(inst, m);
        return m;
    }

private:
    using DefBit = std::pair<int, std::string>;  // (def label, variable)
    struct Flip {
        int label;
        std::string var;
        bool is_array;
    };

    struct Instance {
        const Procedure* proc = nullptr;
        FactSet proj;
        std::set<DefBit> hot_scalar;
        std::set<DefBit> hot_array;
        FactSet summary;
    };

    bool scalar_hot(const Instance& inst, int label, const std::string& v) const {
        for (int d : du_.reaching_scalar(label, v))
            if (inst.hot_scalar.count({d, v})) return true;
        return false;
    }

    bool array_hot(const Instance& inst, int label, const std::string& a) const {
        for (int d : du_.reaching_array(label, a))
            if (inst.hot_array.count({d, a})) return true;
        return false;
    }

    bool atom_hot(const Instance& inst, int label, const Atom& at) const {
        return !at.lit && scalar_hot(inst, label, at.var);
    }

    const Instance& instance(const std::string& proc, const FactSet& proj) {
        auto key = std::make_pair(proc, proj);
        auto it = instances_.find(key);
        if (it != instances_.end()) return it->second;

        Instance inst;
        inst.proc = p_.find_proc(proc);
        inst.proj = proj;
        for (const auto& f : proj)
            (f.array ? inst.hot_array : inst.hot_scalar).insert({DefUse::kEntryDef, f.name});

        int exit = g_.exit_label.at(proc);
        std::deque<int> work;
        std::set<int> queued;
        auto enqueue = [&](int l) {
            if (l != exit && queued.insert(l).second) work.push_back(l);
        };
        for (int l : g_.labels_of(proc)) enqueue(l);

        while (!work.empty()) {
            int l = work.front();
            work.pop_front();
            queued.erase(l);
            const Stmt* s = g_.nodes.at(l).stmt;
            std::vector<Flip> flips;
            eval_defs(inst, l, *s, flips);
            for (const auto& [dl, var, is_array] : flips) {
                for (int u : du_.chain_uses(var, dl, is_array)) {
                    const Stmt* us = g_.nodes.count(u) ? g_.nodes.at(u).stmt : nullptr;
                    if (us && (us->is<Stmt::Assign>() || us->is<Stmt::Load>() ||
                               us->is<Stmt::Store>() || us->is<Stmt::Call>()))
                        enqueue(u);
                }
            }
        }

        // exit projection: return scalars plus formal arrays
        for (const auto& r : inst.proc->returns)
            if (scalar_hot(inst, exit, r)) inst.summary.insert(scalar_fact(r));
        for (const auto& prm : inst.proc->params)
            if (prm.is_array && array_hot(inst, exit, prm.name))
                inst.summary.insert(array_fact(prm.name));

        return instances_.emplace(key, std::move(inst)).first->second;
    }

    void eval_defs(Instance& inst, int l, const Stmt& s, std::vector<Flip>& flips) {
        auto set_scalar = [&](const std::string& v, bool bit) {
            if (bit && inst.hot_scalar.insert({l, v}).second) flips.push_back({l, v, false});
        };
        auto set_array = [&](const std::string& a, bool bit) {
            if (bit && inst.hot_array.insert({l, a}).second) flips.push_back({l, a, true});
        };
        if (auto* a = std::get_if<Stmt::Assign>(&s.node)) {
            std::vector<std::string> vars;
            expr_vars(*a->rhs, vars);
            bool bit = std::any_of(vars.begin(), vars.end(),
                                   [&](const std::string& v) { return scalar_hot(inst, l, v); });
            set_scalar(a->lhs, bit);
        } else if (auto* ld = std::get_if<Stmt::Load>(&s.node)) {
            set_scalar(ld->lhs, array_hot(inst, l, ld->array));
        } else if (auto* st = std::get_if<Stmt::Store>(&s.node)) {
            set_array(st->array, atom_hot(inst, l, st->value));
        } else if (auto* c = std::get_if<Stmt::Call>(&s.node)) {
            const Procedure* callee = p_.find_proc(c->callee);
            FactSet tin;
            for (size_t i = 0; i < c->args.size(); ++i) {
                const Param& prm = callee->params[i];
                if (prm.is_array) {
                    if (array_hot(inst, l, c->args[i].var)) tin.insert(array_fact(prm.name));
                } else if (atom_hot(inst, l, c->args[i])) {
                    tin.insert(scalar_fact(prm.name));
                }
            }
            const FactSet& tout = instance(c->callee, tin).summary;
            for (size_t i = 0; i < callee->returns.size(); ++i)
                set_scalar(c->lhs[i], tout.count(scalar_fact(callee->returns[i])) > 0);
            for (size_t i = 0; i < c->args.size(); ++i)
                if (callee->params[i].is_array)
                    set_array(c->args[i].var,
                              tout.count(array_fact(callee->params[i].name)) > 0);
        }
    }

    void materialize(const Instance& inst, TaintMap& m) const {
        int exit = g_.exit_label.at(inst.proc->name);
        for (int l : g_.labels_of(inst.proc->name)) {
            if (l == exit) continue;
            FactSet& facts = m.at[l];
            auto sit = du_.scalar_reach.find(l);
            if (sit != du_.scalar_reach.end())
                for (const auto& [v, defs] : sit->second)
                    for (int d : defs)
                        if (inst.hot_scalar.count({d, v})) {
                            facts.insert(scalar_fact(v));
                            break;
                        }
            auto ait = du_.array_reach.find(l);
            if (ait != du_.array_reach.end())
                for (const auto& [a, defs] : ait->second)
                    for (int d : defs)
                        if (inst.hot_array.count({d, a})) {
                            facts.insert(array_fact(a));
                            break;
                        }
        }
    }

    const Program& p_;
    const Icfg& g_;
    const DefUse& du_;
    std::map<std::pair<std::string, FactSet>, Instance> instances_;
};

}  // namespace

TaintMap analyze_sparse(const Program& p, const Icfg& g, const DefUse& du) {
    return SparseEngine(p, g, du).run();
}

TaintMap analyze(const Program& p) {
    Icfg g = build_icfg(p);
    DefUse du = def_use(p, g);
    return analyze_sparse(p, g, du);
}

void resolve_step1(std::vector<Source>& sources, const TaintMap& tmap) {
    for (auto& s : sources)
        if (s.status == SourceStatus::Unresolved && !tmap.scalar_tainted(s.label, s.var))
            s.status = SourceStatus::ResolvedStep1;
}

std::string dump_taint(const TaintMap& t) {
    std::ostringstream os;
    for (const auto& [l, facts] : t.at) os << l << ": " << fact_set_text(facts) << "\n";
    return os.str();
}

}  // namespace ctprover
