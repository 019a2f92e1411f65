#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ctprover/term.hpp"

namespace ctprover {

// Renders a complete QF_BV script deciding satisfiability of `formula != 0`:
// one declare-const per free symbol, shared subterms bound with nested lets,
// then (check-sat) and (get-model).
std::string smtlib_text(const TermBuilder& tb, TermRef formula);

enum class SolverStatus { Sat, Unsat, Unknown };

struct SolverResult {
    SolverStatus status = SolverStatus::Unknown;
    TermEnv model;        // values from define-fun lines when sat
    std::string detail;   // raw first line / error note for diagnostics
};

// Reads a solver's textual reply: first line sat|unsat|unknown, then an
// optional model of `(define-fun name () (_ BitVec w) value)` entries with
// #x / #b / (_ bvN w) literals.
SolverResult parse_solver_output(const std::string& text);

// Writes the script to a temp file and runs `cmd file` under `timeout`.
// A timeout or spawn failure reports Unknown with a detail note.
SolverResult run_solver(const std::string& cmd, const std::string& script,
                        double timeout_s);

// Minimal reader for the scripts this library emits (and the subset a
// bit-vector solver needs): declare-const at a single common width, let,
// the bv* operators, ite, =, distinct, not, and, or, bv literals.
struct SmtScript {
    int width = 0;                                  // common BitVec width
    std::vector<std::pair<std::string, int>> decls; // name, declared width
    std::shared_ptr<TermBuilder> tb;
    std::vector<TermRef> asserts;                   // each holds iff nonzero
    bool check_sat = false;
    bool get_model = false;
};

SmtScript parse_smtlib(const std::string& text);

}  // namespace ctprover
