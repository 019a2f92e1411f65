#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ctprover/interp.hpp"
#include "ctprover/product.hpp"
#include "ctprover/term.hpp"

namespace ctprover {

enum class VcKind { GuardValidity, InvariantInit, InvariantInductive, UnwindingCheck };
const char* vc_kind_text(VcKind k);

enum class VcMode { Invariant, Bmc };

struct Vc {
    int id = 0;
    VcKind kind = VcKind::GuardValidity;
    // Guard VCs carry the product label of the originating assert; invariant
    // and unwinding VCs carry the product label of their while statement.
    int assert_id = -1;
    int candidate = -1;  // index into candidate_invariants[assert_id], else -1
    TermRef violation = nullptr;  // satisfiable (nonzero) iff the check can fail
};

// Terms are owned by the bundled builder; keep it alive while using the VCs.
struct VcSet {
    std::shared_ptr<TermBuilder> tb;
    std::vector<Vc> vcs;
};

struct VcConfig {
    VcMode mode = VcMode::Invariant;
    int unroll = 16;
    uint64_t inline_cap = 1u << 20;  // executed-statement budget
    // While label -> candidate indices assumed across havoc and obliged with
    // establish/inductive VCs. Bmc mode ignores invariants entirely.
    std::map<int, std::vector<int>> live;
};

// Symbolically executes the product with path merging, arrays blasted to one
// variable per element, calls inlined. Guard asserts become GuardValidity VCs
// and are then assumed; bounds and user asserts are assumptions only, as are
// divisor-nonzero side conditions (a stuck run discharges nothing).
VcSet gen_vcs(const ProductProgram& pp, int width, const VcConfig& cfg);

enum class VerdictKind { Valid, Invalid, Unknown };
enum class UnknownReason { None, SolverUnknown, UnwindBoundHit, Timeout };
const char* verdict_text(VerdictKind k);
const char* unknown_reason_text(UnknownReason r);

struct Verdict {
    VerdictKind kind = VerdictKind::Unknown;
    TermEnv model;  // Invalid only: values for the formula's free symbols
    UnknownReason reason = UnknownReason::None;
};

struct BackendConfig {
    // Empty = internal enumerative backend. Otherwise a solver executable,
    // invoked as `cmd file.smt2`, answering sat|unsat|unknown on line one.
    std::string solver_cmd;
    double timeout_vc = 30.0;
    uint64_t enum_cap = 1ull << 22;  // assignments tried before sampling
    uint64_t enum_seed = 1;          // sampling seed beyond the cap
    std::string emit_dir;            // when set, dump vc_<id>.smt2 files
};

Verdict check_vc(const TermBuilder& tb, const Vc& vc, const BackendConfig& backend);

struct VerifyConfig {
    int width = 8;
    int unroll = 16;
    uint64_t inline_cap = 1u << 20;
    double budget_s = 0.0;  // wall-clock budget for the whole call; 0 = none
    BackendConfig backend;
};

// Drops every candidate whose establish or inductive obligation fails under
// the current candidate set, repeating to a fixed point; survivors Confirmed.
ProductProgram prune_invariants(const ProductProgram& pp, const VerifyConfig& cfg);

// Invariant-mode proof pass under the Confirmed invariants, then bounded
// model checking for guards left unproved. A guard is Valid from the proof
// pass alone, or from Bmc when every unwinding check also passed; Bmc
// counterexamples yield Invalid with a model over entry parameters.
std::map<int, Verdict> verify_guards(const ProductProgram& pp, const VerifyConfig& cfg);

struct ReplayResult {
    bool confirmed = false;
    InputBinding in1, in2;
    Trace trace1, trace2;
    size_t divergence = 0;  // index of the first differing event
    std::string reason;     // why the witness is spurious, when it is
};

// Splits a cross-product model into two runs of the original program agreeing
// on public inputs; confirmed iff both complete with diverging traces.
ReplayResult witness_replay(const Program& original, const ProductProgram& pp,
                            const TermEnv& model, int width);

}  // namespace ctprover
