#pragma once

#include <cstdint>
#include <string>

#include "ctprover/ast.hpp"

namespace ctprover {

// Feature mask for the random program generator.
constexpr uint32_t kGenBranches = 1u << 0;
constexpr uint32_t kGenArrays = 1u << 1;
constexpr uint32_t kGenLoops = 1u << 2;
constexpr uint32_t kGenAll = kGenBranches | kGenArrays | kGenLoops;

// Seeded surface text: a well-formed entry procedure with at least one secret
// parameter. Loops are counter-driven with bounds of at most four iterations,
// so every run terminates; variable array indices are masked into range and
// asserted in bounds, so no run gets stuck on an access.
std::string generate_source(uint64_t seed, int budget, uint32_t features = kGenAll);

// generate_source, parsed and normalized.
Program generate_random_program(uint64_t seed, int budget, uint32_t features = kGenAll);

}  // namespace ctprover
