#include "ctprover/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <sstream>

#include "ctprover/errors.hpp"
#include "ctprover/normalize.hpp"
#include "ctprover/product.hpp"

namespace ctprover {

namespace {

using Clock = std::chrono::steady_clock;
using ordered_json = nlohmann::ordered_json;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::map<Source, std::vector<int>> group_guards(const std::map<int, Source>& guard_index) {
    std::map<Source, std::vector<int>> g;
    for (const auto& [label, src] : guard_index) g[src].push_back(label);
    return g;
}

bool all_valid(const std::vector<int>& labels, const std::map<int, Verdict>& verdicts) {
    if (labels.empty()) return false;
    for (int l : labels) {
        auto it = verdicts.find(l);
        if (it == verdicts.end() || it->second.kind != VerdictKind::Valid) return false;
    }
    return true;
}

bool resolved(SourceStatus s) {
    return s == SourceStatus::ResolvedStep1 || s == SourceStatus::ResolvedStep2 ||
           s == SourceStatus::ResolvedStep3;
}

}  // namespace

const char* stage_sel_text(StageSel s) {
    switch (s) {
    case StageSel::Step1Only: return "1";
    case StageSel::UpToStep2: return "2";
    case StageSel::Full: return "all";
    }
    return "?";
}

const char* pipeline_verdict_text(PipelineVerdict v) {
    switch (v) {
    case PipelineVerdict::Proved: return "proved";
    case PipelineVerdict::LeaksFound: return "leaks_found";
    case PipelineVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

TaintMap refine(const TaintMap& tmap, const std::map<int, Verdict>& verdicts,
                const std::map<int, Source>& guard_index) {
    TaintMap out = tmap;
    for (const auto& [src, labels] : group_guards(guard_index))
        if (all_valid(labels, verdicts)) out.at[src.label].erase(scalar_fact(src.var));
    return out;
}

Report run_pipeline(const Program& p, const PipelineConfig& cfg) {
    Report r;
    r.name = cfg.name.empty() ? p.entry : cfg.name;
    r.width = cfg.width;
    r.config = cfg;

    const double deadline = cfg.deadline_s;
    auto t0 = Clock::now();
    auto elapsed = [&] { return seconds_since(t0); };
    // elapsed-time checkpoints by which each stage must be done
    const double stop2 = 0.40 * deadline;
    const double stop3 = deadline;

    std::vector<Source> sources = collect_sources(p);
    TaintMap tmap = analyze(p);
    resolve_step1(sources, tmap);
    r.counts[0] = static_cast<int>(sources.size());
    r.stage_seconds[0] = elapsed();
    r.stage_reached = 1;

    std::map<Source, int> stage_of;
    std::map<Source, ReplayResult> witness_of;
    for (const auto& s : sources)
        if (s.status == SourceStatus::ResolvedStep1) stage_of[s] = 1;

    auto unresolved = [&] {
        int n = 0;
        for (const auto& s : sources)
            if (s.status == SourceStatus::Unresolved) n++;
        return n;
    };

    auto make_cfg = [&](double checkpoint, double share) {
        VerifyConfig vc;
        vc.width = cfg.width;
        vc.unroll = cfg.unroll;
        vc.backend = cfg.backend;
        if (deadline > 0) vc.budget_s = std::max(0.01, (checkpoint - elapsed()) * share);
        return vc;
    };

    // Runs one product stage: prune invariants, verify guards, update source
    // statuses. Returns the guard verdict map keyed by source.
    auto run_stage = [&](int stage, const TaintMap& dir, double checkpoint,
                         std::map<int, Verdict>* out_verdicts, ProductProgram* out_pp) {
        ProductProgram pp =
            stage == 2 ? build_semi_product(p, dir) : build_cross_product(p, dir);
        ProductProgram pruned = prune_invariants(pp, make_cfg(checkpoint, 0.5));
        std::map<int, Verdict> verdicts = verify_guards(pruned, make_cfg(checkpoint, 1.0));
        auto groups = group_guards(pruned.guard_index);
        SourceStatus ok =
            stage == 2 ? SourceStatus::ResolvedStep2 : SourceStatus::ResolvedStep3;
        for (auto& s : sources) {
            if (s.status != SourceStatus::Unresolved) continue;
            auto it = groups.find(s);
            if (it == groups.end()) continue;  // untainted under dir: left as is
            if (all_valid(it->second, verdicts)) {
                s.status = ok;
                stage_of[s] = stage;
            }
        }
        *out_verdicts = std::move(verdicts);
        *out_pp = std::move(pruned);
    };

    auto stage_deadline_ok = [&](double checkpoint) {
        if (deadline > 0 && checkpoint - elapsed() <= 0.005) {
            r.deadline_hit = true;
            return false;
        }
        return true;
    };

    // stage 2: precise taint over the semi product
    if (cfg.stages != StageSel::Step1Only && !cfg.skip_step2 && unresolved() > 0) {
        double ts = elapsed();
        r.stage_reached = 2;
        if (stage_deadline_ok(stop2)) {
            try {
                std::map<int, Verdict> verdicts;
                ProductProgram pruned;
                run_stage(2, tmap, stop2, &verdicts, &pruned);
                tmap = refine(tmap, verdicts, pruned.guard_index);
            } catch (const CtError& e) {
                r.note = std::string("stage 2 aborted: ") + e.what();
            }
        }
        r.counts[1] = unresolved();
        r.stage_seconds[1] = elapsed() - ts;
    }

    // stage 3: self-composition over the cross product
    if (cfg.stages == StageSel::Full && unresolved() > 0) {
        double ts = elapsed();
        r.stage_reached = 3;
        if (stage_deadline_ok(stop3)) {
            try {
                std::map<int, Verdict> verdicts;
                ProductProgram pruned;
                run_stage(3, tmap, stop3, &verdicts, &pruned);
                auto groups = group_guards(pruned.guard_index);
                for (auto& s : sources) {
                    if (s.status != SourceStatus::Unresolved) continue;
                    s.status = SourceStatus::Unknown;
                    stage_of[s] = 3;
                    auto it = groups.find(s);
                    if (it == groups.end()) continue;
                    for (int l : it->second) {
                        auto vt = verdicts.find(l);
                        if (vt == verdicts.end() || vt->second.kind != VerdictKind::Invalid)
                            continue;
                        ReplayResult rep = witness_replay(p, pruned, vt->second.model, cfg.width);
                        if (rep.confirmed) {
                            s.status = SourceStatus::ConfirmedLeak;
                            witness_of[s] = std::move(rep);
                        }
                        break;  // first refuted guard decides
                    }
                }
            } catch (const CtError& e) {
                r.note = std::string("stage 3 aborted: ") + e.what();
            }
        }
        int open = 0;
        for (const auto& s : sources)
            if (!resolved(s.status)) open++;
        r.counts[2] = open;
        r.stage_seconds[2] = elapsed() - ts;
    }

    bool leak = false, open = false;
    for (auto& s : sources) {
        if (s.status == SourceStatus::ConfirmedLeak) leak = true;
        if (s.status == SourceStatus::Unresolved || s.status == SourceStatus::Unknown)
            open = true;
        SourceReport sr;
        sr.source = s;
        auto it = stage_of.find(s);
        sr.stage = it != stage_of.end() ? it->second : r.stage_reached;
        auto wt = witness_of.find(s);
        if (wt != witness_of.end()) {
            sr.has_witness = true;
            sr.witness = wt->second;
        }
        r.sources.push_back(std::move(sr));
    }
    r.verdict = leak          ? PipelineVerdict::LeaksFound
                : open        ? PipelineVerdict::Inconclusive
                              : PipelineVerdict::Proved;
    return r;
}

std::string profile_text(const Report& r) {
    std::ostringstream os;
    for (int i = 0; i < 3; i++) {
        if (i) os << ":";
        if (r.counts[i] < 0)
            os << "-";
        else
            os << r.counts[i];
    }
    return os.str();
}

namespace {

ordered_json binding_json(const InputBinding& in) {
    ordered_json j = ordered_json::object();
    ordered_json sc = ordered_json::object();
    for (const auto& [k, v] : in.scalars) sc[k] = v;
    ordered_json ar = ordered_json::object();
    for (const auto& [k, v] : in.arrays) ar[k] = v;
    j["scalars"] = std::move(sc);
    j["arrays"] = std::move(ar);
    return j;
}

ordered_json trace_json(const Trace& t) {
    ordered_json a = ordered_json::array();
    for (const auto& e : t) {
        ordered_json ev = ordered_json::object();
        ev["label"] = e.label;
        ev["kind"] = event_kind_text(e.kind);
        ev["value"] = e.value;
        a.push_back(std::move(ev));
    }
    return a;
}

}  // namespace

std::string report_json(const Report& r) {
    ordered_json j;
    j["schema"] = 1;
    j["name"] = r.name;
    j["width"] = r.width;
    j["verdict"] = pipeline_verdict_text(r.verdict);
    j["profile"] = profile_text(r);
    ordered_json counts = ordered_json::object();
    const char* keys[3] = {"step1", "step2", "step3"};
    for (int i = 0; i < 3; i++)
        counts[keys[i]] = r.counts[i] < 0 ? ordered_json(nullptr) : ordered_json(r.counts[i]);
    j["counts"] = std::move(counts);

    ordered_json srcs = ordered_json::array();
    for (const auto& sr : r.sources) {
        ordered_json s = ordered_json::object();
        s["label"] = sr.source.label;
        s["var"] = sr.source.var;
        s["kind"] = source_kind_text(sr.source.kind);
        s["status"] = source_status_text(sr.source.status);
        s["stage"] = sr.stage;
        if (sr.has_witness) {
            ordered_json w = ordered_json::object();
            w["in1"] = binding_json(sr.witness.in1);
            w["in2"] = binding_json(sr.witness.in2);
            w["trace1"] = trace_json(sr.witness.trace1);
            w["trace2"] = trace_json(sr.witness.trace2);
            w["divergence"] = sr.witness.divergence;
            s["witness"] = std::move(w);
        }
        srcs.push_back(std::move(s));
    }
    j["sources"] = std::move(srcs);
    j["deadline_hit"] = r.deadline_hit;
    j["note"] = r.note;

    ordered_json cf = ordered_json::object();
    cf["width"] = r.config.width;
    cf["unroll"] = r.config.unroll;
    cf["step"] = stage_sel_text(r.config.stages);
    cf["no_step2"] = r.config.skip_step2;
    cf["backend"] = r.config.backend.solver_cmd.empty()
                        ? std::string("enum")
                        : "cmd:" + r.config.backend.solver_cmd;
    cf["timeout_vc"] = r.config.backend.timeout_vc;
    cf["deadline"] = r.config.deadline_s;
    j["config"] = std::move(cf);
    return j.dump(2) + "\n";
}

std::string report_text(const Report& r) {
    std::ostringstream os;
    os << r.name << ": " << pipeline_verdict_text(r.verdict) << "  (width " << r.width
       << ", profile " << profile_text(r) << ")\n";
    const char* names[3] = {"step 1", "step 2", "step 3"};
    for (int i = 0; i < 3; i++) {
        if (r.counts[i] < 0) continue;
        os << "  " << names[i] << ": ";
        if (i == 0)
            os << r.counts[i] << " source(s) found";
        else
            os << r.counts[i] << " unresolved";
        char buf[32];
        snprintf(buf, sizeof(buf), "%.3f", r.stage_seconds[i]);
        os << "  [" << buf << " s]\n";
    }
    for (const auto& sr : r.sources) {
        os << "  [" << sr.source.label << "] " << source_kind_text(sr.source.kind) << " "
           << sr.source.var << ": " << source_status_text(sr.source.status) << " (stage "
           << sr.stage << ")";
        if (sr.has_witness) os << ", traces diverge at event " << sr.witness.divergence;
        os << "\n";
    }
    if (r.deadline_hit) os << "  deadline hit\n";
    if (!r.note.empty()) os << "  note: " << r.note << "\n";
    return os.str();
}

}  // namespace ctprover
