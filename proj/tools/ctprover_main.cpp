#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctprover/corpus.hpp"
#include "ctprover/errors.hpp"
#include "ctprover/interp.hpp"
#include "ctprover/normalize.hpp"
#include "ctprover/oracle.hpp"
#include "ctprover/pipeline.hpp"
#include "ctprover/preanalysis.hpp"
#include "ctprover/parser.hpp"
#include "ctprover/printer.hpp"
#include "ctprover/product.hpp"
#include "ctprover/taint.hpp"

namespace {

// Parses "name=17" or "name=[1,2,3]" into the binding.
void add_input(ctprover::InputBinding& in, const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw CLI::ValidationError("--in", "expected name=value or name=[v,...]: " + spec);
    std::string name = spec.substr(0, eq);
    std::string val = spec.substr(eq + 1);
    if (val.empty())
        throw CLI::ValidationError("--in", "empty value in " + spec);
    if (val.front() == '[') {
        if (val.back() != ']')
            throw CLI::ValidationError("--in", "unterminated array in " + spec);
        std::vector<uint64_t> vals;
        std::string body = val.substr(1, val.size() - 2);
        size_t pos = 0;
        while (pos < body.size()) {
            size_t comma = body.find(',', pos);
            std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            vals.push_back(std::stoull(item, nullptr, 0));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        in.arrays[name] = std::move(vals);
    } else {
        in.scalars[name] = std::stoull(val, nullptr, 0);
    }
}

int cmd_run(const std::string& file, const std::vector<std::string>& ins, int width) {
    auto prog = ctprover::normalize(ctprover::parse_file(file));
    ctprover::InputBinding in;
    for (const auto& s : ins) add_input(in, s);
    ctprover::Interpreter interp(prog, width);
    auto res = interp.run(in);
    for (const auto& ev : res.trace) std::cout << ctprover::trace_line(ev) << "\n";
    switch (res.status) {
        case ctprover::RunStatus::Complete: {
            for (const auto& name : prog.entry_proc().returns)
                std::cout << name << " = " << res.returns.at(name) << "\n";
            return 0;
        }
        case ctprover::RunStatus::Stuck:
            std::cout << "stuck at " << res.stop_label << "\n";
            return 1;
        case ctprover::RunStatus::Blocked:
            std::cout << "blocked at " << res.stop_label << "\n";
            return 1;
        case ctprover::RunStatus::FuelExhausted:
            std::cout << "fuel exhausted\n";
            return 1;
    }
    return 1;
}

int cmd_oracle(const std::string& file, int width, uint64_t max_pairs, uint64_t seed) {
    auto prog = ctprover::normalize(ctprover::parse_file(file));
    ctprover::OracleLimits lim;
    lim.max_pairs = max_pairs;
    lim.seed = seed;
    auto res = ctprover::oracle_check_ct(prog, width, lim);
    std::cout << (res.secure ? "secure" : "insecure")
              << " pairs=" << res.pairs_checked
              << " runs=" << res.runs
              << " exhausted=" << (res.exhausted ? "yes" : "no") << "\n";
    if (res.witness) {
        const auto& w = *res.witness;
        std::cout << "divergence at index " << w.divergence << "\n";
        auto dump = [](const char* tag, const ctprover::InputBinding& in, const ctprover::Trace& tr) {
            std::cout << tag << ":";
            for (const auto& [k, v] : in.scalars) std::cout << " " << k << "=" << v;
            for (const auto& [k, vs] : in.arrays) {
                std::cout << " " << k << "=[";
                for (size_t i = 0; i < vs.size(); ++i) std::cout << (i ? "," : "") << vs[i];
                std::cout << "]";
            }
            std::cout << "\n";
            for (const auto& ev : tr) std::cout << "  " << ctprover::trace_line(ev) << "\n";
        };
        dump("run1", w.inputs1, w.trace1);
        dump("run2", w.inputs2, w.trace2);
    }
    return res.secure ? 0 : 1;
}

int cmd_taint(const std::string& file) {
    auto prog = ctprover::normalize(ctprover::parse_file(file));
    auto tmap = ctprover::analyze(prog);
    std::cout << ctprover::dump_taint(tmap);
    auto sources = ctprover::collect_sources(prog);
    ctprover::resolve_step1(sources, tmap);
    for (const auto& s : sources)
        std::cout << "source " << s.label << " " << ctprover::source_kind_text(s.kind)
                  << " " << s.var << ": " << ctprover::source_status_text(s.status) << "\n";
    return 0;
}

int cmd_product(const std::string& file, const std::string& kind, const std::string& out_path) {
    auto prog = ctprover::normalize(ctprover::parse_file(file));
    auto tmap = ctprover::analyze(prog);
    auto pp = kind == "semi" ? ctprover::build_semi_product(prog, tmap)
                             : ctprover::build_cross_product(prog, tmap);
    std::string side = out_path;
    if (side.size() > 3 && side.substr(side.size() - 3) == ".wh") side.resize(side.size() - 3);
    side += ".guards.json";

    std::ofstream wh(out_path);
    if (!wh) throw ctprover::InputError("cannot write " + out_path);
    wh << ctprover::pretty_print(pp.program);
    std::ofstream js(side);
    if (!js) throw ctprover::InputError("cannot write " + side);
    js << ctprover::guards_json(pp);
    std::cout << "wrote " << out_path << " and " << side << " (" << pp.guard_index.size()
              << " guards)\n";
    return 0;
}

std::string file_stem(const std::string& path) {
    size_t slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    size_t dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

// "enum" or "cmd:<path>"
void set_backend(ctprover::BackendConfig& be, const std::string& spec) {
    if (spec == "enum") {
        be.solver_cmd.clear();
    } else if (spec.rfind("cmd:", 0) == 0) {
        be.solver_cmd = spec.substr(4);
        if (be.solver_cmd.empty())
            throw CLI::ValidationError("--solver", "empty command in " + spec);
    } else {
        throw CLI::ValidationError("--solver", "expected enum or cmd:<path>, got " + spec);
    }
}

struct VerifyOpts {
    std::string file;
    int width = 8;
    int unroll = 16;
    std::string step = "all";
    std::string solver = "enum";
    double timeout_vc = 30.0;
    double deadline = 600.0;
    std::string json_out;
    std::string emit_smt;
    bool no_step2 = false;
    bool quiet = false;
};

int cmd_verify(const VerifyOpts& o) {
    auto prog = ctprover::normalize(ctprover::parse_file(o.file));
    ctprover::PipelineConfig cfg;
    cfg.name = file_stem(o.file);
    cfg.width = o.width;
    cfg.unroll = o.unroll;
    cfg.deadline_s = o.deadline;
    cfg.skip_step2 = o.no_step2;
    if (o.step == "1")
        cfg.stages = ctprover::StageSel::Step1Only;
    else if (o.step == "2")
        cfg.stages = ctprover::StageSel::UpToStep2;
    else
        cfg.stages = ctprover::StageSel::Full;
    set_backend(cfg.backend, o.solver);
    cfg.backend.timeout_vc = o.timeout_vc;
    cfg.backend.emit_dir = o.emit_smt;

    auto report = ctprover::run_pipeline(prog, cfg);
    if (!o.quiet) std::cout << ctprover::report_text(report);
    if (!o.json_out.empty()) {
        std::ofstream out(o.json_out);
        if (!out) throw ctprover::InputError("cannot write " + o.json_out);
        out << ctprover::report_json(report);
    }
    switch (report.verdict) {
        case ctprover::PipelineVerdict::Proved: return 0;
        case ctprover::PipelineVerdict::LeaksFound: return 1;
        case ctprover::PipelineVerdict::Inconclusive: return 2;
    }
    return 2;
}

int cmd_corpus(const std::string& manifest, const std::string& solver, int unroll,
               double timeout_vc, bool no_oracle) {
    ctprover::CorpusConfig cfg;
    cfg.manifest = manifest;
    cfg.unroll = unroll;
    cfg.check_oracle = !no_oracle;
    set_backend(cfg.backend, solver);
    cfg.backend.timeout_vc = timeout_vc;
    auto sum = ctprover::run_corpus(cfg);
    std::cout << ctprover::corpus_table(sum);
    return sum.failed == 0 ? 0 : 1;
}

int cmd_dump(const std::string& file, bool icfg) {
    auto prog = ctprover::normalize(ctprover::parse_file(file));
    if (icfg)
        std::cout << ctprover::dump_icfg(ctprover::build_icfg(prog));
    else
        std::cout << ctprover::pretty_print(prog);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constant-time verifier for While programs"};
    app.require_subcommand(1);

    std::string file;
    std::vector<std::string> ins;
    int width = 8;
    uint64_t max_pairs = 1000000, seed = 1;

    auto* run = app.add_subcommand("run", "execute a program and print its observation trace");
    run->add_option("file", file)->required();
    run->add_option("--in", ins, "input binding name=value or name=[v,...]");
    run->add_option("--width", width)->check(CLI::IsMember({4, 8, 16, 32, 64}));

    auto* oracle = app.add_subcommand("oracle", "brute-force constant-time check");
    oracle->add_option("file", file)->required();
    oracle->add_option("--width", width)->check(CLI::IsMember({4, 8, 16, 32, 64}));
    oracle->add_option("--max-pairs", max_pairs);
    oracle->add_option("--seed", seed);

    bool dump_icfg_flag = false;
    auto* dump = app.add_subcommand("dump", "print the normalized program or its graphs");
    dump->add_option("file", file)->required();
    dump->add_flag("--icfg", dump_icfg_flag, "emit the interprocedural CFG, one edge per line");

    auto* taint = app.add_subcommand("taint", "print per-label taint facts and source resolution");
    taint->add_option("file", file)->required();

    std::string prod_kind = "semi", prod_out = "out.wh";
    auto* product = app.add_subcommand("product", "emit a product program and its guard side-car");
    product->add_option("file", file)->required();
    product->add_option("--kind", prod_kind)->check(CLI::IsMember({"semi", "cross"}));
    product->add_option("-o,--out", prod_out, "output .wh path; guards go to <out>.guards.json");

    VerifyOpts vo;
    auto* verify = app.add_subcommand("verify", "run the three-stage constant-time pipeline");
    verify->add_option("file", vo.file)->required();
    verify->add_option("--width", vo.width)->check(CLI::IsMember({4, 8, 16, 32, 64}));
    verify->add_option("--unroll", vo.unroll, "loop unrolling bound for bounded checking")
        ->check(CLI::NonNegativeNumber);
    verify->add_option("--step", vo.step, "run stages up to: 1, 2, or all")
        ->check(CLI::IsMember({"all", "1", "2", "3"}));
    verify->add_option("--solver", vo.solver, "enum or cmd:<path-to-smtlib-solver>");
    verify->add_option("--timeout-vc", vo.timeout_vc, "per-condition timeout in seconds");
    verify->add_option("--deadline", vo.deadline, "global deadline in seconds, 0 disables");
    verify->add_option("--json", vo.json_out, "write the machine-readable report here");
    verify->add_option("--emit-smt", vo.emit_smt, "dump every condition as <dir>/vc_<id>.smt2");
    verify->add_flag("--no-step2", vo.no_step2, "skip the precise taint stage");
    verify->add_flag("-q,--quiet", vo.quiet, "suppress the text report");

    std::string manifest = "corpus/expected.txt", corpus_solver = "enum";
    int corpus_unroll = 16;
    double corpus_timeout = 30.0;
    bool no_oracle = false;
    auto* corpus = app.add_subcommand("corpus", "check every corpus case against its manifest");
    corpus->add_option("--manifest", manifest);
    corpus->add_option("--solver", corpus_solver, "enum or cmd:<path>");
    corpus->add_option("--unroll", corpus_unroll);
    corpus->add_option("--timeout-vc", corpus_timeout);
    corpus->add_flag("--no-oracle", no_oracle, "skip brute-force validation of expectations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (run->parsed()) return cmd_run(file, ins, width);
        if (oracle->parsed()) return cmd_oracle(file, width, max_pairs, seed);
        if (dump->parsed()) return cmd_dump(file, dump_icfg_flag);
        if (taint->parsed()) return cmd_taint(file);
        if (product->parsed()) return cmd_product(file, prod_kind, prod_out);
        if (verify->parsed()) return cmd_verify(vo);
        if (corpus->parsed())
            return cmd_corpus(manifest, corpus_solver, corpus_unroll, corpus_timeout, no_oracle);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
