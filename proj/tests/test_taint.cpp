#include <doctest.h>

#include <sstream>

#include "ctprover/interp.hpp"
#include "ctprover/normalize.hpp"
#include "ctprover/taint.hpp"
#include "test_support.hpp"

using namespace ctprover;

namespace {

FactSet facts(std::initializer_list<const char*> scalars,
              std::initializer_list<const char*> arrays = {}) {
    FactSet f;
    for (const char* s : scalars) f.insert(scalar_fact(s));
    for (const char* a : arrays) f.insert(array_fact(a));
    return f;
}

const Stmt* find_stmt(const Program& p, const std::function<bool(const Stmt&)>& pred) {
    const Stmt* found = nullptr;
    for (const auto& proc : p.procedures)
        for_each_stmt(*proc.body, [&](const Stmt& s) {
            if (!found && pred(s)) found = &s;
        });
    return found;
}

int count_names(const Program& p) {
    int n = 0;
    for (const auto& proc : p.procedures) {
        n += static_cast<int>(proc.params.size() + proc.locals.size() + proc.local_arrays.size());
    }
    return n;
}

}  // namespace

TEST_CASE("assignment rule: taint and strong untaint") {
    auto p = ts::load("def main(sec k, pub q) { var x; x := k + 1; x := q; return x; }");
    TaintEvaluator ev(p);
    const Stmt* taint = find_stmt(p, [](const Stmt& s) {
        return s.is<Stmt::Assign>() && !s.as<Stmt::Assign>().rhs->is_var();
    });
    const Stmt* untaint = find_stmt(p, [](const Stmt& s) {
        return s.is<Stmt::Assign>() && s.as<Stmt::Assign>().rhs->is_var();
    });
    CHECK(ev.transfer(*taint, facts({"k"})) == facts({"k", "x"}));
    CHECK(ev.transfer(*taint, facts({})) == facts({}));
    CHECK(ev.transfer(*untaint, facts({"x"})) == facts({}));
    CHECK(ev.transfer(*untaint, facts({"q", "x"})) == facts({"q", "x"}));
}

TEST_CASE("load rule follows the whole array status") {
    auto p = ts::load("def main(pub i, sec k) { array a[2]; var x; x := a[i]; return x; }");
    TaintEvaluator ev(p);
    const Stmt* load = find_stmt(p, [](const Stmt& s) { return s.is<Stmt::Load>(); });
    CHECK(ev.transfer(*load, facts({}, {"a"})) == facts({"x"}, {"a"}));
    CHECK(ev.transfer(*load, facts({"x"})) == facts({}));
    CHECK(ev.transfer(*load, facts({"i"})) == facts({"i"}));  // index taint does not taint lhs
}

TEST_CASE("store rule adds whole array taint and never removes it") {
    auto p = ts::load("def main(pub i, sec z) { array a[2]; a[i] := z; return; }");
    TaintEvaluator ev(p);
    const Stmt* store = find_stmt(p, [](const Stmt& s) { return s.is<Stmt::Store>(); });
    CHECK(ev.transfer(*store, facts({"z"})) == facts({"z"}, {"a"}));
    CHECK(ev.transfer(*store, facts({})) == facts({}));
    CHECK(ev.transfer(*store, facts({}, {"a"})) == facts({}, {"a"}));
}

TEST_CASE("skip assert and assume are identity") {
    auto p = ts::load("def main(sec k) { var x; skip; assert k < 4; assume k < 2; x := 0; return x; }");
    TaintEvaluator ev(p);
    auto t = facts({"k"}, {});
    for_each_stmt(*p.entry_proc().body, [&](const Stmt& s) {
        if (s.is<Stmt::Skip>() || s.is<Stmt::Assert>() || s.is<Stmt::Assume>())
            CHECK(ev.transfer(s, t) == t);
    });
}

TEST_CASE("if rule joins both branch results") {
    auto p = ts::load(R"(
def main(sec k, pub q) {
    var x; var t;
    t := q == 0;
    if t then x := k; else x := q; fi
    return x;
}
)");
    TaintEvaluator ev(p);
    const Stmt* iff = find_stmt(p, [](const Stmt& s) { return s.is<Stmt::If>(); });
    CHECK(ev.transfer(*iff, facts({"k"})) == facts({"k", "x"}));
    CHECK(ev.transfer(*iff, facts({})) == facts({}));
}

TEST_CASE("sequencing threads facts left to right") {
    auto p = ts::load("def main(sec k) { var a; var b; a := k; b := a; a := 1; return b; }");
    TaintEvaluator ev(p);
    auto out = ev.transfer(*p.entry_proc().body, facts({"k"}));
    CHECK(out == facts({"k", "b"}));  // a was strongly untainted at the end
}

TEST_CASE("while rule accumulates the loop fixpoint") {
    auto p = ts::load(R"(
def main(sec k, pub n) {
    var go; var t; var x; var i;
    i := 0;
    go := i < n;
    while go do
        t := k;
        x := t;
        i := i + 1;
        go := i < n;
    od
    return x;
}
)");
    TaintEvaluator ev(p);
    const Stmt* wh = find_stmt(p, [](const Stmt& s) { return s.is<Stmt::While>(); });
    auto out = ev.transfer(*wh, facts({"k"}));
    CHECK(out == facts({"k", "t", "x"}));
}

TEST_CASE("fixpoint of a self assignment converges in one pass") {
    auto p = ts::load(R"(
def main(sec k) {
    var x; var go;
    go := 0;
    while go do
        x := x;
        go := 0;
    od
    return x;
}
)");
    TaintEvaluator ev(p);
    const Stmt* wh = find_stmt(p, [](const Stmt& s) { return s.is<Stmt::While>(); });
    auto in = facts({"k"});
    CHECK(ev.lfp(*wh->as<Stmt::While>().body, in) == in);
    CHECK(ev.max_lfp_passes() <= 2);  // one growing pass plus the confirming pass
}

TEST_CASE("rotation through temporaries terminates and keeps taint") {
    // t := x; x := y; y := t rotates facts through the loop; the accumulated
    // union reaches a fixpoint even though the per-iteration sets cycle.
    auto p = ts::load(R"(
def main(sec x, pub y, pub n) {
    var t; var i; var go;
    i := 0;
    go := i < n;
    while go do
        t := x;
        x := y;
        y := t;
        i := i + 1;
        go := i < n;
    od
    return x;
}
)");
    TaintEvaluator ev(p);
    const Stmt* wh = find_stmt(p, [](const Stmt& s) { return s.is<Stmt::While>(); });
    auto out = ev.transfer(*wh, facts({"x"}));
    CHECK(out == facts({"x", "y", "t"}));
}

TEST_CASE("call rule binds parameters and returns per context") {
    auto p = ts::load(R"(
def id(v) { var r; r := v; return r; }
def main(pub q, sec k) {
    var a; var b;
    a := id(q);
    b := id(k);
    return a, b;
}
)");
    TaintEvaluator ev(p);
    std::vector<const Stmt*> calls;
    for_each_stmt(*p.entry_proc().body, [&](const Stmt& s) {
        if (s.is<Stmt::Call>()) calls.push_back(&s);
    });
    REQUIRE(calls.size() == 2);
    CHECK(ev.transfer(*calls[0], facts({"k"})) == facts({"k"}));       // pub arg: a untainted
    CHECK(ev.transfer(*calls[1], facts({"k"})) == facts({"k", "b"}));  // sec arg: b tainted
    CHECK(ev.transfer(*calls[1], facts({"k", "b"})) == facts({"k", "b"}));
    CHECK(ev.transfer(*calls[0], facts({"k", "a"})) == facts({"k"}));  // result strongly updated
}

TEST_CASE("call rule translates array facts through formals") {
    auto p = ts::load(R"(
def put(a[2], v) {
    var z;
    a[0] := v;
    z := 0;
    return z;
}
def main(pub q, sec k) {
    array m[2];
    var z;
    z := put(m, k);
    return z;
}
)");
    TaintEvaluator ev(p);
    const Stmt* call = find_stmt(p, [](const Stmt& s) { return s.is<Stmt::Call>(); });
    auto out = ev.transfer(*call, facts({"k"}));
    CHECK(out == facts({"k"}, {"m"}));
    // untainted argument leaves the array clean
    CHECK(ev.transfer(*call, facts({})) == facts({}));
}

TEST_CASE("analysis of the table scan resolves every source at step one") {
    auto p = normalize(parse_file(ts::corpus_path("example1_fixfrac.wh")));
    auto tmap = analyze(p);
    auto sources = collect_sources(p);
    REQUIRE(sources.size() == 5);
    resolve_step1(sources, tmap);
    for (const auto& s : sources) CHECK(s.status == SourceStatus::ResolvedStep1);
}

TEST_CASE("secret stores poison the whole array and later branches") {
    auto p = ts::load(R"(
def main(sec k0, sec k1, pub n) {
    array ctx[4];
    var j; var t; var r;
    ctx[0] := k0;
    ctx[1] := k1;
    ctx[3] := n;
    j := ctx[3];
    t := j == 0;
    if t then r := 1; else r := 2; fi
    return r;
}
)");
    auto tmap = analyze(p);
    auto sources = collect_sources(p);
    REQUIRE(sources.size() == 1);  // only the branch; constant indices observe nothing
    resolve_step1(sources, tmap);
    CHECK(sources[0].status == SourceStatus::Unresolved);
    CHECK(tmap.scalar_tainted(sources[0].label, sources[0].var));
}

TEST_CASE("no secret annotations give empty fact sets everywhere") {
    auto p = ts::load(R"(
def main(pub a, pub b) {
    var x; var t;
    t := a < b;
    if t then x := a; else x := b; fi
    return x;
}
)");
    auto tmap = analyze(p);
    for (const auto& [l, f] : tmap.at) CHECK(f.empty());
}

static const char* kAgreementPrograms[] = {
    "def main(sec k) { var x; x := k; x := 0; return x; }",
    R"(
def main(sec k, pub p) {
    array a[4];
    var i; var go; var v; var acc;
    a[0] := k;
    i := 0;
    go := i < p;
    while go do
        v := a[i];
        acc := acc + v;
        i := i + 1;
        go := i < p;
    od
    return acc;
}
)",
    R"(
def mix(u, v) { var r; r := u ^ v; return r; }
def main(sec k, pub p) {
    var a; var b; var c;
    a := mix(p, p);
    b := mix(k, p);
    c := mix(b, a);
    return c;
}
)",
    R"(
def put(a[2], v) { var z; a[0] := v; z := a[1]; return z; }
def main(sec k, pub p) {
    array m[2];
    array n[2];
    var x; var y;
    x := put(m, k);
    y := put(n, p);
    return x, y;
}
)",
    R"(
def main(sec k, pub p) {
    var x; var t; var go; var i;
    t := p == 0;
    if t then x := k; else x := p; fi
    i := 0;
    go := i < p;
    while go do
        x := p;
        i := i + 1;
        go := i < p;
    od
    return x;
}
)",
};

TEST_CASE("sparse analysis agrees with the dense evaluator fact for fact") {
    for (const char* text : kAgreementPrograms) {
        auto p = ts::load(text);
        auto dense = TaintEvaluator(p).analyze();
        auto g = build_icfg(p);
        auto du = def_use(p, g);
        auto sparse = analyze_sparse(p, g, du);
        REQUIRE(dense.at.size() == sparse.at.size());
        for (const auto& [l, f] : dense.at) {
            INFO("label ", l, " dense ", fact_set_text(f), " sparse ",
                 fact_set_text(sparse.at_label(l)));
            CHECK(sparse.at_label(l) == f);
        }
    }
    auto p = normalize(parse_file(ts::corpus_path("example1_fixfrac.wh")));
    auto dense = TaintEvaluator(p).analyze();
    auto sparse = analyze(p);
    CHECK(dense.at == sparse.at);
}

TEST_CASE("fixpoint passes stay within the fact count bound") {
    for (const char* text : kAgreementPrograms) {
        auto p = ts::load(text);
        TaintEvaluator ev(p);
        ev.analyze();
        CHECK(ev.max_lfp_passes() <= count_names(p) + 1);
    }
}

TEST_CASE("adding a secret annotation only grows fact sets") {
    const char* fmt = R"(
def main(%s a, sec b) {
    array m[2];
    var x; var t; var go; var i;
    m[0] := a;
    x := b & 1;
    t := a < 2;
    i := 0;
    go := i < a;
    while go do
        x := x + a;
        i := i + 1;
        go := i < a;
    od
    return x;
}
)";
    char pub_src[512], sec_src[512];
    snprintf(pub_src, sizeof pub_src, fmt, "pub");
    snprintf(sec_src, sizeof sec_src, fmt, "sec");
    auto small = analyze(ts::load(pub_src));
    auto big = analyze(ts::load(sec_src));
    for (const auto& [l, f] : small.at) {
        const auto& bf = big.at_label(l);
        for (const auto& fact : f) CHECK(bf.count(fact));
    }
}

TEST_CASE("taint dump prints one label per line in order") {
    auto p = ts::load("def main(sec k) { var x; x := k; x := 0; return x; }");
    auto text = dump_taint(analyze(p));
    std::istringstream is(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(is, line)) lines.push_back(line);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "0: {k}");
    CHECK(lines[1] == "1: {k, x}");
}

// Step-1 soundness at small width: when every source resolves, any two runs
// agreeing on the public inputs observe identical source-variable values.
namespace {

using ValueLog = std::map<std::pair<int, std::string>, std::vector<uint64_t>>;

bool step1_observations_agree(const Program& p) {
    auto tmap = analyze(p);
    auto sources = collect_sources(p);
    resolve_step1(sources, tmap);
    for (const auto& s : sources)
        if (s.status != SourceStatus::ResolvedStep1) return false;

    auto split = split_entry_params(p);
    struct Field {
        std::string name;
        bool is_array;
        size_t index;
        bool secret;
    };
    std::vector<Field> fields;
    auto add = [&](const Param& prm, bool secret) {
        if (prm.is_array)
            for (size_t i = 0; i < prm.length; ++i) fields.push_back({prm.name, true, i, secret});
        else
            fields.push_back({prm.name, false, 0, secret});
    };
    for (const auto& prm : split.public_params) add(prm, false);
    for (const auto& prm : split.secret_params) add(prm, true);

    const int width = 4;
    const uint64_t per = 1ull << width;
    uint64_t total = 1;
    for (size_t i = 0; i < fields.size(); ++i) total *= per;
    REQUIRE(total <= (1ull << 14));

    Interpreter interp(p, width);
    auto run_log = [&](const std::vector<uint64_t>& vals) {
        InputBinding in;
        for (const auto& prm : p.entry_proc().params)
            if (prm.is_array) in.arrays[prm.name].resize(prm.length);
        for (size_t i = 0; i < fields.size(); ++i) {
            if (fields[i].is_array)
                in.arrays[fields[i].name][fields[i].index] = vals[i];
            else
                in.scalars[fields[i].name] = vals[i];
        }
        ValueLog log;
        interp.observer = [&](int label) {
            for (const auto& s : sources)
                if (s.label == label) log[{label, s.var}].push_back(interp.scalar(s.var));
        };
        interp.run(in);
        interp.observer = nullptr;
        return log;
    };

    std::vector<uint64_t> vals(fields.size(), 0);
    std::map<std::vector<uint64_t>, ValueLog> canon;  // public projection -> first log
    for (;;) {
        std::vector<uint64_t> pub;
        for (size_t i = 0; i < fields.size(); ++i)
            if (!fields[i].secret) pub.push_back(vals[i]);
        auto log = run_log(vals);
        auto [it, fresh] = canon.emplace(pub, log);
        if (!fresh && it->second != log) return false;
        size_t i = 0;
        for (; i < vals.size(); ++i) {
            if (++vals[i] < per) break;
            vals[i] = 0;
        }
        if (i == vals.size()) break;
    }
    return true;
}

}  // namespace

TEST_CASE("resolved sources imply equal observations for public-agreeing runs") {
    CHECK(step1_observations_agree(ts::load(R"(
def main(pub p, sec k) {
    array t[4];
    var i; var v; var x;
    t[0] := k;
    i := p & 3;
    v := t[i];
    x := v + k;
    return x;
}
)")));
    CHECK(step1_observations_agree(ts::load(R"(
def main(pub p, sec k) {
    var x; var go; var i;
    x := k;
    i := 0;
    go := i < p;
    while go do
        x := x + k;
        i := i + 1;
        go := i < p;
    od
    return x;
}
)")));
    CHECK(step1_observations_agree(ts::load(R"(
def mask(v) { var r; r := v & 3; return r; }
def main(pub p, sec k) {
    array a[4];
    var j; var w;
    j := mask(p);
    a[j] := k;
    w := a[j];
    return w;
}
)")));
}
