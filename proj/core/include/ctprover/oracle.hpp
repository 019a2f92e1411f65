#pragma once

#include <cstdint>
#include <optional>

#include "ctprover/interp.hpp"

namespace ctprover {

// Brute-force ground truth: a program is constant-time secure at a given
// width iff all complete executions agreeing on the public inputs produce
// the same observation trace.

struct OracleLimits {
    uint64_t max_pairs = 1'000'000;
    int exhaustive_bit_cap = 20;           // exhaustive when total input bits fit
    uint64_t seed = 1;                     // sampling RNG seed
    int sample_publics = 64;               // sampled mode: public vectors drawn
    int sample_secrets = 64;               // sampled mode: secret vectors per public
    uint64_t fuel = kDefaultFuel;
    enum class Mode { Auto, Exhaustive, Sample } mode = Mode::Auto;
};

struct OracleWitness {
    InputBinding inputs1, inputs2;   // agree on public inputs
    size_t divergence = 0;           // first differing trace index
    Trace trace1, trace2;
};

struct OracleResult {
    bool secure = true;               // no divergence found
    bool exhausted = false;           // every complete pair was covered
    uint64_t pairs_checked = 0;
    uint64_t runs = 0;
    uint64_t skipped_incomplete = 0;  // runs that were stuck/blocked/out of fuel
    std::optional<OracleWitness> witness;
};

// Throws CapExceededError when exhaustive mode is requested but the input
// space exceeds the bit cap. In exhaustive mode the reported witness is the
// lexicographically least diverging pair (by public inputs, then the two
// secret assignments, in parameter declaration order).
OracleResult oracle_check_ct(const Program& p, int width, const OracleLimits& limits = {});

// Runs both witness inputs and checks the divergence is reproducible.
bool witness_replays(const Program& p, int width, const OracleWitness& w,
                     uint64_t fuel = kDefaultFuel);

}  // namespace ctprover
