#pragma once

#include <string>
#include <vector>

#include "ctprover/pipeline.hpp"

namespace ctprover {

struct CorpusCase {
    std::string name;     // manifest key; file is <name>.wh beside the manifest
    std::string path;
    std::string verdict;  // expected: proved | leaks_found | inconclusive
    std::string profile;  // expected x:y:z, "-" marks a stage that must not run
    int width = 4;
};

// Parses `name = "verdict profile width"` lines; '#' starts a comment.
std::vector<CorpusCase> load_manifest(const std::string& path);

struct CorpusConfig {
    std::string manifest = "corpus/expected.txt";
    BackendConfig backend;
    int unroll = 16;
    bool check_oracle = true;  // validate verdicts against brute force at width <= 4
    double deadline_s = 0.0;   // per case; 0 disables
};

struct CaseResult {
    std::string name;
    bool pass = false;
    std::string detail;  // first mismatch; empty when passing
    Report report;
};

struct CorpusSummary {
    std::vector<CaseResult> results;  // sorted by case name
    int passed = 0;
    int failed = 0;
};

CorpusSummary run_corpus(const CorpusConfig& cfg);

// One line per case plus a totals line.
std::string corpus_table(const CorpusSummary& s);

}  // namespace ctprover
