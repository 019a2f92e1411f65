#pragma once

#include <map>
#include <string>
#include <vector>

#include "ctprover/ast.hpp"
#include "ctprover/preanalysis.hpp"
#include "ctprover/taint.hpp"

namespace ctprover {

// Two product constructions over a normalized program. SemiCross pairs the
// program with its Boolean abstraction (companion b$x tracks whether x may
// carry secret-derived data); Cross pairs it with a shadow copy (sh$x reruns
// the computation under independently chosen secrets). Both share the
// original control flow and insert one guard assert per still-tainted source
// (two for loops: body begin and loop exit).
enum class ProductKind { SemiCross, Cross };

const char* product_kind_text(ProductKind k);

enum class PredStatus { Candidate, Confirmed, Dropped };

const char* pred_status_text(PredStatus s);

// A flat boolean condition proposed at a loop head. Construction marks all
// predicates Candidate; the verifier confirms or drops them.
struct Predicate {
    ExprPtr expr;
    PredStatus status = PredStatus::Candidate;
};

// b$x for the Boolean abstraction, sh$x for the shadow copy. `$` never occurs
// in user identifiers, so companions cannot collide.
std::string companion_name(const std::string& name, ProductKind kind);

// Boolean abstraction of a flat expression: literals are clean, a variable
// maps to its companion, compound expressions or-combine the parts.
ExprPtr xi(const Expr& e);

// Shadow copy of a flat expression: literals unchanged, variables mapped to
// their shadows, operators preserved.
ExprPtr Xi(const Expr& e);

struct ProductProgram {
    Program program;  // well formed, flat, freshly labeled
    ProductKind kind = ProductKind::SemiCross;

    // product assert label -> the source (original label, variable) it resolves
    std::map<int, Source> guard_index;

    // product while label -> user @inv clauses first, then generated candidates
    std::map<int, std::vector<Predicate>> candidate_invariants;

    // product label -> label of the original statement it copies; statements
    // added by the construction (companions, guards, initializers) are absent
    std::map<int, int> orig_label;
};

// Builds the Boolean-abstraction product directed by tmap: statements whose
// operands are untainted collapse their companion updates to constants, and
// guards appear only where the source variable is still tainted. Companions
// of the entry inputs are initialized 0 (public) or 1 (secret), arrays
// element-wise; every other procedure threads companions through doubled
// parameter and return lists.
ProductProgram build_semi_product(const Program& p, const TaintMap& tmap);

// Builds the self-composition product directed by tmap: shadows of public
// entry inputs copy the originals, shadows of secret entry inputs become
// fresh secret parameters appended to the entry signature, untainted
// statements collapse the shadow to the original value, tainted ones rerun
// the computation over shadows.
ProductProgram build_cross_product(const Program& p, const TaintMap& tmap);

// Candidate invariants for one normalized loop: every scalar defined in the
// body whose value transitively feeds the loop condition yields !b$y
// (SemiCross) or y == sh$y (Cross), in name order.
std::vector<Predicate> gen_invariants(const Stmt& loop, ProductKind mode, const DefUse& du);

// JSON side-car mapping guard assert labels to their sources.
std::string guards_json(const ProductProgram& pp);

}  // namespace ctprover
