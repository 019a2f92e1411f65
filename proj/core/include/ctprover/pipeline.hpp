#pragma once

#include <array>
#include <string>
#include <vector>

#include "ctprover/ast.hpp"
#include "ctprover/taint.hpp"
#include "ctprover/verifier.hpp"

namespace ctprover {

enum class StageSel { Step1Only, UpToStep2, Full };

const char* stage_sel_text(StageSel s);

struct PipelineConfig {
    std::string name;  // report label, typically the file stem
    int width = 8;
    int unroll = 16;
    StageSel stages = StageSel::Full;
    bool skip_step2 = false;  // ablation: run stage 3 directly on the stage-1 map
    BackendConfig backend;
    double deadline_s = 600.0;  // 0 disables the global deadline
};

enum class PipelineVerdict { Proved, LeaksFound, Inconclusive };

const char* pipeline_verdict_text(PipelineVerdict v);

struct SourceReport {
    Source source;  // carries the final status
    int stage = 1;  // stage that decided (or last examined) it
    bool has_witness = false;
    ReplayResult witness;  // meaningful iff has_witness
};

struct Report {
    std::string name;
    int width = 8;
    PipelineVerdict verdict = PipelineVerdict::Inconclusive;

    // x:y:z source counts: total found, unresolved after stage 2, unresolved
    // after stage 3; -1 when the stage did not run.
    std::array<int, 3> counts{-1, -1, -1};

    std::vector<SourceReport> sources;
    std::array<double, 3> stage_seconds{0.0, 0.0, 0.0};
    int stage_reached = 1;
    bool deadline_hit = false;
    std::string note;  // failure detail when a stage aborted
    PipelineConfig config;
};

// Removes from the map every source fact whose guards all verified; the
// returned map differs from the input only at source labels.
TaintMap refine(const TaintMap& tmap, const std::map<int, Verdict>& verdicts,
                const std::map<int, Source>& guard_index);

Report run_pipeline(const Program& p, const PipelineConfig& cfg);

// "x:y:z" with "-" for stages that did not run, e.g. "5:-:-".
std::string profile_text(const Report& r);

// Stable-keyed JSON for CI diffing; timings are excluded so identical
// configurations produce byte-identical output.
std::string report_json(const Report& r);

// Human-readable summary, one line per stage and per source.
std::string report_text(const Report& r);

}  // namespace ctprover
