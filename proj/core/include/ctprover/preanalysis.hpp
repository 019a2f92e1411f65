#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctprover/ast.hpp"

namespace ctprover {

struct CallEdge {
    std::string caller;
    int label = -1;  // call-site label
    std::string callee;
};

struct CallGraph {
    std::vector<std::string> nodes;  // reachable from the entry
    std::vector<CallEdge> edges;
    std::vector<std::string> topo_order;  // callers before callees; entry first
};

CallGraph build_callgraph(const Program& p);

// Interprocedural CFG. Nodes are statement labels plus one synthetic exit
// label per procedure (numbered past the last statement label). Statements
// that finish a procedure flow into its exit node; calls additionally get a
// call edge to the callee entry and a return edge from the callee exit back
// to the fall-through successor.
struct Icfg {
    struct Node {
        int label = -1;
        const Stmt* stmt = nullptr;  // null for exit nodes
        std::string proc;
    };

    std::map<int, Node> nodes;
    std::map<int, std::vector<int>> intra_succ;
    std::map<int, std::vector<int>> intra_pred;
    std::vector<std::pair<int, int>> call_edges;    // call label -> callee entry
    std::vector<std::pair<int, int>> return_edges;  // callee exit -> return site
    std::map<std::string, int> entry_label;         // empty body: the exit label
    std::map<std::string, int> exit_label;

    const std::string& proc_of(int label) const;
    std::vector<int> labels_of(const std::string& proc) const;  // sorted, incl. exit
};

Icfg build_icfg(const Program& p);
std::string dump_icfg(const Icfg& g);

// Variables a single statement reads and (re)defines. Array accesses are
// whole-array: a Load reads the array, a Store defines it, a Call both reads
// and defines every array argument (pseudo-def at the call site).
struct StmtAccess {
    std::vector<std::string> scalar_reads;
    std::vector<std::string> scalar_defs;
    std::vector<std::string> array_reads;
    std::vector<std::string> array_defs;
};

StmtAccess stmt_access(const Stmt& s);

// Reaching definitions and def-use chains over the ICFG, per procedure.
// Definition site kEntryDef stands for the procedure entry, which binds the
// parameters and zero-initializes the locals. Return variables are read at
// the procedure's exit label. Scalars get strong kills; array definitions
// are never killed (stores and calls update arrays weakly).
struct DefUse {
    static constexpr int kEntryDef = -1;

    std::map<std::string, std::set<int>> scalar_defs;
    std::map<std::string, std::set<int>> scalar_uses;
    std::map<std::string, std::set<int>> array_defs;
    std::map<std::string, std::set<int>> array_uses;

    // label -> var -> definition sites reaching immediately before the label
    std::map<int, std::map<std::string, std::set<int>>> scalar_reach;
    std::map<int, std::map<std::string, std::set<int>>> array_reach;

    // var -> def site -> use labels covered by that def
    std::map<std::string, std::map<int, std::set<int>>> scalar_chains;
    std::map<std::string, std::map<int, std::set<int>>> array_chains;

    const std::set<int>& reaching_scalar(int label, const std::string& var) const;
    const std::set<int>& reaching_array(int label, const std::string& arr) const;
    const std::set<int>& chain_uses(const std::string& var, int def, bool is_array) const;
};

DefUse def_use(const Program& p, const Icfg& g);

}  // namespace ctprover
