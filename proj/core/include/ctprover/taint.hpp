#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctprover/ast.hpp"
#include "ctprover/preanalysis.hpp"

namespace ctprover {

// A taint fact is a scalar variable or a whole array; array facts are
// index-insensitive by design.
struct TaintFact {
    std::string name;
    bool array = false;

    bool operator<(const TaintFact& o) const {
        return name != o.name ? name < o.name : array < o.array;
    }
    bool operator==(const TaintFact& o) const { return name == o.name && array == o.array; }
};

using FactSet = std::set<TaintFact>;

inline TaintFact scalar_fact(std::string n) { return {std::move(n), false}; }
inline TaintFact array_fact(std::string n) { return {std::move(n), true}; }

std::string fact_set_text(const FactSet& s);  // "{a, buf[]}"

struct TaintMap {
    std::map<int, FactSet> at;  // label -> facts holding immediately before it

    const FactSet& at_label(int label) const;
    bool scalar_tainted(int label, const std::string& var) const;
    bool array_tainted(int label, const std::string& arr) const;
};

// The secret entry parameters of the program, as the initial fact set.
FactSet entry_seed(const Program& p);

// Every scalar and array of its owning procedure at every label. Building a
// product against this map disables taint direction entirely; it exists to
// show the directed build is a pure optimization.
TaintMap all_tainted(const Program& p);

// Reference engine: structural evaluation of the inference rules with
// accumulating union semantics for loops and per-(procedure, entry facts)
// summaries for calls. Facts recorded at a label join over every context in
// which the label is reached.
class TaintEvaluator {
public:
    explicit TaintEvaluator(const Program& p);

    // Effect of one statement (compound statements included) on a fact set.
    FactSet transfer(const Stmt& s, const FactSet& t);

    // Least fixed point of a loop body from t, as the union over all
    // iteration counts.
    FactSet lfp(const Stmt& body, const FactSet& t);

    // Full analysis from the entry seed; fills the per-label map.
    TaintMap analyze();

    // Largest number of passes any single lfp computation needed; the bound
    // |facts in scope| + 1 holds because the accumulated set only grows.
    int max_lfp_passes() const { return max_lfp_passes_; }

private:
    FactSet transfer_call(const Stmt::Call& c, int label, const FactSet& t);
    void record(int label, const FactSet& t);

    const Program& p_;
    std::map<int, FactSet> at_;
    std::map<std::pair<std::string, FactSet>, FactSet> summaries_;
    int max_lfp_passes_ = 0;
};

// Production engine: sparse propagation of taint bits over definition sites
// and array events along def-use chains, context-sensitive through
// (procedure, entry projection) instances. Agrees with TaintEvaluator
// fact-for-fact on every label.
TaintMap analyze_sparse(const Program& p, const Icfg& g, const DefUse& du);

// Convenience wrapper building the pre-analysis internally.
TaintMap analyze(const Program& p);

// Step-1 resolution: a source whose variable is untainted at its label
// cannot leak.
void resolve_step1(std::vector<Source>& sources, const TaintMap& tmap);

// `ℓ: {facts}` per reachable label, ascending.
std::string dump_taint(const TaintMap& t);

}  // namespace ctprover
