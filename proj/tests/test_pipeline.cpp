#include <doctest.h>

#include <json.hpp>

#include <set>

#include "ctprover/fuzz.hpp"
#include "ctprover/oracle.hpp"
#include "ctprover/pipeline.hpp"
#include "ctprover/printer.hpp"
#include "ctprover/product.hpp"
#include "ctprover/taint.hpp"
#include "test_support.hpp"

using namespace ctprover;

namespace {

const char* kXorBranch = R"(
def main(pub p, sec k) {
    var x; var t; var r;
    x := k ^ p ^ k;
    t := x < 4;
    if t then r := 1; else r := 2; fi
    return r;
}
)";

const char* kStoreClears = R"(
def main(pub p, sec k) {
    array a[4];
    var vv; var t; var u; var r; var j;
    a[2] := k;
    a[2] := p;
    j := p & 3;
    vv := a[j];
    t := vv ^ p;
    u := t == 0;
    if u then r := 1; else r := 2; fi
    return r;
}
)";

const char* kLeakyBranch = R"(
def main(pub p, sec k) {
    var t; var r;
    t := k < 4;
    if t then r := 1; else r := 2; fi
    return r;
}
)";

const char* kSecretCountLoop = R"(
def main(pub p, sec k) {
    var go; var c;
    c := k;
    go := c > 0;
    while go do
        c := c - 1;
        go := c > 0;
    od
    return c;
}
)";

PipelineConfig cfg4(const std::string& name) {
    PipelineConfig c;
    c.name = name;
    c.width = 4;
    return c;
}

}  // namespace

TEST_CASE("refine removes exactly the facts whose guards all verified") {
    TaintMap t;
    t.at[3] = {scalar_fact("x"), scalar_fact("q")};
    t.at[7] = {scalar_fact("y")};
    std::map<int, Source> gi;
    gi[100] = Source{3, "x", SourceKind::BranchCond, SourceStatus::Unresolved};
    gi[101] = Source{7, "y", SourceKind::LoopCond, SourceStatus::Unresolved};
    gi[102] = Source{7, "y", SourceKind::LoopCond, SourceStatus::Unresolved};

    std::map<int, Verdict> v;
    v[100].kind = VerdictKind::Valid;
    v[101].kind = VerdictKind::Valid;
    v[102].kind = VerdictKind::Unknown;  // one of two loop guards unresolved

    TaintMap out = refine(t, v, gi);
    CHECK(!out.at_label(3).count(scalar_fact("x")));
    CHECK(out.at_label(3).count(scalar_fact("q")));  // untouched: not a source
    CHECK(out.at_label(7).count(scalar_fact("y")));  // conjunction rule

    v[102].kind = VerdictKind::Valid;
    TaintMap out2 = refine(t, v, gi);
    CHECK(!out2.at_label(7).count(scalar_fact("y")));
}

TEST_CASE("fixfrac proves at stage 1 with profile 5:-:-") {
    auto p = normalize(parse_file(ts::corpus_path("example1_fixfrac.wh")));
    Report r = run_pipeline(p, cfg4("fixfrac"));
    CHECK(r.verdict == PipelineVerdict::Proved);
    CHECK(profile_text(r) == "5:-:-");
    CHECK(r.stage_reached == 1);
    for (const auto& sr : r.sources) {
        CHECK(sr.source.status == SourceStatus::ResolvedStep1);
        CHECK(sr.stage == 1);
    }
}

TEST_CASE("dead store proves at stage 2 with profile 2:0:-") {
    auto p = ts::load(kStoreClears);
    Report r = run_pipeline(p, cfg4("store_clears"));
    CHECK(r.verdict == PipelineVerdict::Proved);
    CHECK(profile_text(r) == "2:0:-");
    REQUIRE(r.sources.size() == 2);  // the public load index and the branch
    int step1 = 0, step2 = 0;
    for (const auto& sr : r.sources) {
        step1 += sr.source.status == SourceStatus::ResolvedStep1;
        step2 += sr.source.status == SourceStatus::ResolvedStep2;
    }
    CHECK(step1 == 1);
    CHECK(step2 == 1);
}

TEST_CASE("xor cancellation passes stage 2 to stage 3: profile 1:1:0") {
    auto p = ts::load(kXorBranch);
    Report r = run_pipeline(p, cfg4("kxor"));
    CHECK(r.verdict == PipelineVerdict::Proved);
    CHECK(profile_text(r) == "1:1:0");
    REQUIRE(r.sources.size() == 1);
    CHECK(r.sources[0].source.status == SourceStatus::ResolvedStep3);
    CHECK(r.sources[0].stage == 3);
}

TEST_CASE("confirmed leaks carry replaying witnesses") {
    for (const char* text : {kLeakyBranch, kSecretCountLoop}) {
        auto p = ts::load(text);
        Report r = run_pipeline(p, cfg4("leaky"));
        CHECK(r.verdict == PipelineVerdict::LeaksFound);
        bool saw_leak = false;
        for (const auto& sr : r.sources) {
            if (sr.source.status != SourceStatus::ConfirmedLeak) continue;
            saw_leak = true;
            REQUIRE(sr.has_witness);
            CHECK(sr.witness.trace1 != sr.witness.trace2);
            // public inputs agree
            for (const auto& [name, val] : sr.witness.in1.scalars) {
                bool is_sec = false;
                for (const auto& prm : p.entry_proc().params)
                    if (prm.name == name && prm.annot == Annot::Secret) is_sec = true;
                if (!is_sec) CHECK(sr.witness.in2.scalars.at(name) == val);
            }
        }
        CHECK(saw_leak);
    }
}

TEST_CASE("loop-count leak names the loop condition source") {
    auto p = ts::load(kSecretCountLoop);
    Report r = run_pipeline(p, cfg4("count_loop"));
    REQUIRE(r.verdict == PipelineVerdict::LeaksFound);
    bool loop_leak = false;
    for (const auto& sr : r.sources)
        if (sr.source.kind == SourceKind::LoopCond &&
            sr.source.status == SourceStatus::ConfirmedLeak)
            loop_leak = true;
    CHECK(loop_leak);
}

TEST_CASE("step selection stops the pipeline early") {
    auto p = ts::load(kXorBranch);

    auto c1 = cfg4("kxor");
    c1.stages = StageSel::Step1Only;
    Report r1 = run_pipeline(p, c1);
    CHECK(r1.verdict == PipelineVerdict::Inconclusive);
    CHECK(profile_text(r1) == "1:-:-");

    auto c2 = cfg4("kxor");
    c2.stages = StageSel::UpToStep2;
    Report r2 = run_pipeline(p, c2);
    CHECK(r2.verdict == PipelineVerdict::Inconclusive);
    CHECK(profile_text(r2) == "1:1:-");

    auto j = nlohmann::json::parse(report_json(r1));
    CHECK(j["counts"]["step1"] == 1);
    CHECK(j["counts"]["step2"].is_null());
    CHECK(j["counts"]["step3"].is_null());
    CHECK(j["verdict"] == "inconclusive");
}

TEST_CASE("skipping stage 2 reaches the same verdicts through stage 3") {
    for (const char* text : {kXorBranch, kStoreClears, kLeakyBranch}) {
        auto p = ts::load(text);
        Report with = run_pipeline(p, cfg4("n"));
        auto c = cfg4("n");
        c.skip_step2 = true;
        Report without = run_pipeline(p, c);
        CHECK(without.counts[1] == -1);

        // same confirmed-leak set
        std::set<Source> leaks_a, leaks_b;
        for (const auto& sr : with.sources)
            if (sr.source.status == SourceStatus::ConfirmedLeak) leaks_a.insert(sr.source);
        for (const auto& sr : without.sources)
            if (sr.source.status == SourceStatus::ConfirmedLeak) leaks_b.insert(sr.source);
        CHECK(leaks_a == leaks_b);
        if (with.verdict == PipelineVerdict::Proved)
            CHECK(without.verdict == PipelineVerdict::Proved);
    }
}

TEST_CASE("report json is byte-identical across runs and excludes timings") {
    auto p = ts::load(kSecretCountLoop);
    std::string a = report_json(run_pipeline(p, cfg4("d")));
    std::string b = report_json(run_pipeline(p, cfg4("d")));
    CHECK(a == b);
    auto j = nlohmann::json::parse(a);
    CHECK(!j.contains("stage_seconds"));
    CHECK(j["verdict"] == "leaks_found");
    bool witnessed = false;
    for (const auto& s : j["sources"])
        if (s.contains("witness")) {
            witnessed = true;
            CHECK(s["witness"]["trace1"].is_array());
            CHECK(s["witness"]["trace2"].is_array());
        }
    CHECK(witnessed);
}

TEST_CASE("count monotonicity holds on mixed programs") {
    const char* mixed = R"(
def main(pub p, sec k) {
    var t; var u; var r; var x;
    x := k ^ p ^ k;
    t := x < 4;
    if t then r := 1; else r := 2; fi
    u := k & 1;
    if u then r := r + 1; else skip; fi
    return r;
}
)";
    auto p = ts::load(mixed);
    Report r = run_pipeline(p, cfg4("mixed"));
    CHECK(r.verdict == PipelineVerdict::LeaksFound);
    REQUIRE(r.counts[0] >= 0);
    if (r.counts[1] >= 0) CHECK(r.counts[0] >= r.counts[1]);
    if (r.counts[2] >= 0 && r.counts[1] >= 0) CHECK(r.counts[1] >= r.counts[2]);
}

TEST_CASE("a tiny deadline yields a partial inconclusive report") {
    auto p = ts::load(kSecretCountLoop);
    auto c = cfg4("slow");
    c.deadline_s = 1e-6;
    Report r = run_pipeline(p, c);
    CHECK(r.deadline_hit);
    CHECK(r.verdict == PipelineVerdict::Inconclusive);
    CHECK(r.counts[0] >= 1);
}

TEST_CASE("generator honors the feature mask") {
    auto branch_only = generate_random_program(1, 10, kGenBranches);
    int whiles = 0, loads = 0, stores = 0;
    for_each_stmt(branch_only, [&](const Stmt& s) {
        whiles += s.is<Stmt::While>();
        loads += s.is<Stmt::Load>();
        stores += s.is<Stmt::Store>();
    });
    CHECK(whiles == 0);
    CHECK(loads == 0);
    CHECK(stores == 0);

    auto with_arrays = generate_random_program(2, 12, kGenAll);
    int loads2 = 0, asserts2 = 0;
    for_each_stmt(with_arrays, [&](const Stmt& s) {
        loads2 += s.is<Stmt::Load>();
        asserts2 += s.is<Stmt::Assert>();
    });
    CHECK(loads2 >= 1);
    CHECK(asserts2 >= 1);
}

TEST_CASE("generated programs round-trip and always have a secret input") {
    for (uint64_t seed = 1; seed <= 100; seed++) {
        auto p = generate_random_program(seed, 10 + seed % 8);
        bool has_secret = false;
        for (const auto& prm : p.entry_proc().params)
            if (prm.annot == Annot::Secret) has_secret = true;
        CHECK(has_secret);
        auto back = normalize(parse(pretty_print(p)));
        CHECK(program_equal(p, back));
    }
}

TEST_CASE("fuzz: pipeline verdicts agree with the oracle at width 4") {
    int proved = 0, leaks = 0;
    for (uint64_t seed = 1; seed <= 60; seed++) {
        auto p = generate_random_program(seed, 8 + seed % 6);
        Report r = run_pipeline(p, cfg4("fuzz"));
        OracleResult o = oracle_check_ct(p, 4);
        if (r.verdict == PipelineVerdict::Proved) {
            proved++;
            CHECK(o.secure);
        } else if (r.verdict == PipelineVerdict::LeaksFound) {
            leaks++;
            if (o.exhausted) CHECK(!o.secure);
            for (const auto& sr : r.sources)
                if (sr.has_witness) CHECK(sr.witness.trace1 != sr.witness.trace2);
        }
    }
    // the generator must produce both phenomena for the differential to bite
    CHECK(proved > 0);
    CHECK(leaks > 0);
}
