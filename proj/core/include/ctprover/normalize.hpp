#pragma once

#include <vector>

#include "ctprover/ast.hpp"

namespace ctprover {

// Brings a parsed program into the normalized form every later phase expects:
// globally-unique names, flat three-address expressions, conditions held in
// variables, explicit Load/Store with atom operands, a bounds assert before
// every array access, and sequential labels in deterministic preorder.
// Idempotent: normalize(normalize(p)) is structurally identical.
// Throws NormalizeError subtypes on ill-formed input.
Program normalize(const Program& p);

// Checks the normalized-form invariants (used by tests and as preconditions).
bool is_normalized(const Program& p);

// Deterministic preorder label assignment over all labeled statements.
void assign_labels(Program& p);

// Deep copy (labels included).
StmtPtr clone_stmt(const Stmt& s);
Program clone_program(const Program& p);

// Names of procedures reachable from the entry, in call-graph preorder.
std::vector<std::string> reachable_procedures(const Program& p);

// Potential side-channel sources of a normalized program: one per If and
// While condition, one per Load/Store with a variable index. Constant-index
// accesses observe a compile-time constant and cannot distinguish executions,
// so they carry no source. Sorted by label; covers procedures reachable from
// the entry.
std::vector<Source> collect_sources(const Program& p);

}  // namespace ctprover
