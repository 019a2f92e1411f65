#include "ctprover/preanalysis.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "ctprover/errors.hpp"
#include "ctprover/normalize.hpp"

namespace ctprover {

namespace {

void collect_calls(const Stmt& s, std::vector<const Stmt*>& out) {
    if (s.is<Stmt::Call>()) out.push_back(&s);
    if (auto* b = std::get_if<Stmt::Block>(&s.node)) {
        for (const auto& c : b->stmts) collect_calls(*c, out);
    } else if (auto* i = std::get_if<Stmt::If>(&s.node)) {
        collect_calls(*i->then_body, out);
        collect_calls(*i->else_body, out);
    } else if (auto* w = std::get_if<Stmt::While>(&s.node)) {
        collect_calls(*w->body, out);
    }
}

}  // namespace

CallGraph build_callgraph(const Program& p) {
    CallGraph cg;
    cg.nodes = reachable_procedures(p);
    for (const auto& name : cg.nodes) {
        std::vector<const Stmt*> calls;
        collect_calls(*p.find_proc(name)->body, calls);
        for (const auto* c : calls)
            cg.edges.push_back({name, c->label, c->as<Stmt::Call>().callee});
    }
    // Callers before callees: reverse DFS postorder from the entry.
    std::set<std::string> done;
    std::vector<std::string> post;
    std::function<void(const std::string&)> dfs = [&](const std::string& name) {
        if (!done.insert(name).second) return;
        std::vector<const Stmt*> calls;
        collect_calls(*p.find_proc(name)->body, calls);
        for (const auto* c : calls) dfs(c->as<Stmt::Call>().callee);
        post.push_back(name);
    };
    dfs(p.entry);
    cg.topo_order.assign(post.rbegin(), post.rend());
    return cg;
}

namespace {

class IcfgBuilder {
public:
    explicit IcfgBuilder(const Program& p) : p_(p) {}

    Icfg build() {
        int next_exit = max_label(p_) + 1;
        for (const auto& pr : p_.procedures) {
            int exit = next_exit++;
            g_.exit_label[pr.name] = exit;
            g_.entry_label[pr.name] = first_label(*pr.body, exit);
            g_.nodes[exit] = {exit, nullptr, pr.name};
        }
        for (const auto& pr : p_.procedures) {
            proc_ = pr.name;
            wire(*pr.body, g_.exit_label[pr.name]);
        }
        for (const auto& [from, succs] : g_.intra_succ)
            for (int to : succs) g_.intra_pred[to].push_back(from);
        return std::move(g_);
    }

private:
    int first_label(const Stmt& s, int k) const {
        if (auto* b = std::get_if<Stmt::Block>(&s.node)) {
            for (const auto& c : b->stmts) {
                int f = first_label(*c, -1);
                if (f != -1) return f;
            }
            return k;
        }
        return s.label;
    }

    void add_node(const Stmt& s) { g_.nodes[s.label] = {s.label, &s, proc_}; }

    void wire(const Stmt& s, int k) {
        if (auto* b = std::get_if<Stmt::Block>(&s.node)) {
            for (size_t i = 0; i < b->stmts.size(); ++i) {
                int next = k;
                for (size_t j = i + 1; j < b->stmts.size(); ++j) {
                    int f = first_label(*b->stmts[j], -1);
                    if (f != -1) {
                        next = f;
                        break;
                    }
                }
                wire(*b->stmts[i], next);
            }
            return;
        }
        add_node(s);
        auto& succ = g_.intra_succ[s.label];
        auto push = [&](int to) {
            if (std::find(succ.begin(), succ.end(), to) == succ.end()) succ.push_back(to);
        };
        if (auto* i = std::get_if<Stmt::If>(&s.node)) {
            push(first_label(*i->then_body, k));
            push(first_label(*i->else_body, k));
            wire(*i->then_body, k);
            wire(*i->else_body, k);
        } else if (auto* w = std::get_if<Stmt::While>(&s.node)) {
            push(first_label(*w->body, s.label));
            push(k);
            wire(*w->body, s.label);
        } else if (auto* c = std::get_if<Stmt::Call>(&s.node)) {
            push(k);
            g_.call_edges.emplace_back(s.label, g_.entry_label.at(c->callee));
            g_.return_edges.emplace_back(g_.exit_label.at(c->callee), k);
        } else {
            push(k);
        }
    }

    const Program& p_;
    Icfg g_;
    std::string proc_;
};

}  // namespace

Icfg build_icfg(const Program& p) { return IcfgBuilder(p).build(); }

const std::string& Icfg::proc_of(int label) const { return nodes.at(label).proc; }

std::vector<int> Icfg::labels_of(const std::string& proc) const {
    std::vector<int> out;
    for (const auto& [l, n] : nodes)
        if (n.proc == proc) out.push_back(l);
    return out;
}

std::string dump_icfg(const Icfg& g) {
    std::ostringstream os;
    std::set<std::string> procs;
    for (const auto& [l, n] : g.nodes) procs.insert(n.proc);
    for (const auto& pr : procs)
        os << "# " << pr << ": entry " << g.entry_label.at(pr) << ", exit " << g.exit_label.at(pr)
           << "\n";
    for (const auto& [from, succs] : g.intra_succ)
        for (int to : succs) os << from << " -> " << to << "\n";
    for (const auto& [from, to] : g.call_edges) os << from << " -> " << to << " call\n";
    for (const auto& [from, to] : g.return_edges) os << from << " -> " << to << " return\n";
    return os.str();
}

StmtAccess stmt_access(const Stmt& s) {
    StmtAccess a;
    auto read_atom = [&](const Atom& at) {
        if (!at.lit) a.scalar_reads.push_back(at.var);
    };
    auto read_expr = [&](const Expr& e) { expr_vars(e, a.scalar_reads); };
    if (auto* as = std::get_if<Stmt::Assign>(&s.node)) {
        read_expr(*as->rhs);
        a.scalar_defs.push_back(as->lhs);
    } else if (auto* l = std::get_if<Stmt::Load>(&s.node)) {
        read_atom(l->index);
        a.array_reads.push_back(l->array);
        a.scalar_defs.push_back(l->lhs);
    } else if (auto* st = std::get_if<Stmt::Store>(&s.node)) {
        read_atom(st->index);
        read_atom(st->value);
        a.array_defs.push_back(st->array);
    } else if (auto* at = std::get_if<Stmt::Assert>(&s.node)) {
        read_expr(*at->cond);
    } else if (auto* am = std::get_if<Stmt::Assume>(&s.node)) {
        read_expr(*am->cond);
    } else if (auto* i = std::get_if<Stmt::If>(&s.node)) {
        read_expr(*i->cond);
    } else if (auto* w = std::get_if<Stmt::While>(&s.node)) {
        read_expr(*w->cond);
    } else if (auto* c = std::get_if<Stmt::Call>(&s.node)) {
        for (const auto& arg : c->args) read_atom(arg);
        for (const auto& lhs : c->lhs) a.scalar_defs.push_back(lhs);
        // array arguments: read and (weakly) redefined through the callee
        // (resolved against the callee signature by the caller of this
        // function; here every argument that is not a scalar atom was
        // already excluded by the parser, so array args arrive via names)
    }
    return a;
}

namespace {

// stmt_access cannot see callee signatures, so array call arguments are
// classified here, where the program is available.
StmtAccess full_access(const Program& p, const Stmt& s) {
    StmtAccess a = stmt_access(s);
    if (auto* c = std::get_if<Stmt::Call>(&s.node)) {
        const Procedure* callee = p.find_proc(c->callee);
        for (size_t i = 0; i < c->args.size(); ++i) {
            if (callee->params[i].is_array) {
                const std::string& name = c->args[i].var;
                a.array_reads.push_back(name);
                a.array_defs.push_back(name);
                // drop the array name from the scalar reads
                auto& r = a.scalar_reads;
                r.erase(std::remove(r.begin(), r.end(), name), r.end());
            }
        }
    }
    return a;
}

struct ReachState {
    std::map<std::string, std::set<int>> scalars;
    std::map<std::string, std::set<int>> arrays;

    bool merge_from(const ReachState& o) {
        bool changed = false;
        for (const auto& [v, defs] : o.scalars)
            for (int d : defs) changed |= scalars[v].insert(d).second;
        for (const auto& [v, defs] : o.arrays)
            for (int d : defs) changed |= arrays[v].insert(d).second;
        return changed;
    }
};

}  // namespace

DefUse def_use(const Program& p, const Icfg& g) {
    DefUse du;
    for (const auto& pr : p.procedures) {
        int entry = g.entry_label.at(pr.name);
        int exit = g.exit_label.at(pr.name);
        auto labels = g.labels_of(pr.name);

        ReachState seed;
        auto seed_scalar = [&](const std::string& v) {
            seed.scalars[v].insert(DefUse::kEntryDef);
            du.scalar_defs[v].insert(DefUse::kEntryDef);
        };
        auto seed_array = [&](const std::string& v) {
            seed.arrays[v].insert(DefUse::kEntryDef);
            du.array_defs[v].insert(DefUse::kEntryDef);
        };
        for (const auto& prm : pr.params)
            prm.is_array ? seed_array(prm.name) : seed_scalar(prm.name);
        for (const auto& l : pr.locals) seed_scalar(l);
        for (const auto& d : pr.local_arrays) seed_array(d.name);

        std::map<int, ReachState> in, out;
        std::map<int, StmtAccess> acc;
        for (int l : labels)
            if (l != exit) acc[l] = full_access(p, *g.nodes.at(l).stmt);

        std::deque<int> work(labels.begin(), labels.end());
        std::set<int> queued(labels.begin(), labels.end());
        while (!work.empty()) {
            int l = work.front();
            work.pop_front();
            queued.erase(l);
            ReachState next_in = (l == entry) ? seed : ReachState{};
            auto pit = g.intra_pred.find(l);
            if (pit != g.intra_pred.end())
                for (int pred : pit->second) next_in.merge_from(out[pred]);
            in[l] = std::move(next_in);
            ReachState next_out = in[l];
            if (l != exit) {
                const StmtAccess& a = acc[l];
                for (const auto& v : a.scalar_defs) next_out.scalars[v] = {l};
                for (const auto& v : a.array_defs) next_out.arrays[v].insert(l);
            }
            if (out.count(l) == 0 || out[l].scalars != next_out.scalars ||
                out[l].arrays != next_out.arrays) {
                out[l] = std::move(next_out);
                auto sit = g.intra_succ.find(l);
                if (sit != g.intra_succ.end())
                    for (int s : sit->second)
                        if (queued.insert(s).second) work.push_back(s);
            }
        }

        for (int l : labels) {
            du.scalar_reach[l] = in[l].scalars;
            du.array_reach[l] = in[l].arrays;
        }

        auto use_scalar = [&](int l, const std::string& v) {
            du.scalar_uses[v].insert(l);
            for (int d : in[l].scalars[v]) du.scalar_chains[v][d].insert(l);
        };
        auto use_array = [&](int l, const std::string& v) {
            du.array_uses[v].insert(l);
            for (int d : in[l].arrays[v]) du.array_chains[v][d].insert(l);
        };
        for (int l : labels) {
            if (l == exit) continue;
            const StmtAccess& a = acc[l];
            for (const auto& v : a.scalar_reads) use_scalar(l, v);
            for (const auto& v : a.array_reads) use_array(l, v);
            for (const auto& v : a.scalar_defs) du.scalar_defs[v].insert(l);
            for (const auto& v : a.array_defs) du.array_defs[v].insert(l);
        }
        for (const auto& r : pr.returns) use_scalar(exit, r);
    }
    return du;
}

static const std::set<int> kEmptyDefs;

const std::set<int>& DefUse::reaching_scalar(int label, const std::string& var) const {
    auto it = scalar_reach.find(label);
    if (it == scalar_reach.end()) return kEmptyDefs;
    auto vit = it->second.find(var);
    return vit == it->second.end() ? kEmptyDefs : vit->second;
}

const std::set<int>& DefUse::reaching_array(int label, const std::string& arr) const {
    auto it = array_reach.find(label);
    if (it == array_reach.end()) return kEmptyDefs;
    auto vit = it->second.find(arr);
    return vit == it->second.end() ? kEmptyDefs : vit->second;
}

const std::set<int>& DefUse::chain_uses(const std::string& var, int def, bool is_array) const {
    const auto& chains = is_array ? array_chains : scalar_chains;
    auto it = chains.find(var);
    if (it == chains.end()) return kEmptyDefs;
    auto dit = it->second.find(def);
    return dit == it->second.end() ? kEmptyDefs : dit->second;
}

}  // namespace ctprover
