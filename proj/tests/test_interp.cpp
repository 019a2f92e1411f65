#include <doctest.h>

#include "ctprover/errors.hpp"

#include "ctprover/interp.hpp"
#include "test_support.hpp"

using namespace ctprover;

namespace {

InputBinding bind(std::map<std::string, uint64_t> scalars,
                  std::map<std::string, std::vector<uint64_t>> arrays = {}) {
    InputBinding in;
    in.scalars = std::move(scalars);
    in.arrays = std::move(arrays);
    return in;
}

}  // namespace

TEST_CASE("arithmetic wraps at the configured width") {
    auto p = ts::load("def main(pub x) { var y; y := x + 1; return y; }");
    Interpreter i4(p, 4);
    CHECK(i4.run(bind({{"x", 15}})).returns.at("y") == 0);
    Interpreter i8(p, 8);
    CHECK(i8.run(bind({{"x", 255}})).returns.at("y") == 0);
    CHECK(i8.run(bind({{"x", 254}})).returns.at("y") == 255);
}

TEST_CASE("comparison and logic produce 0 or 1") {
    auto p = ts::load(R"(
def main(pub a, pub b) {
    var lt; var le; var eq; var ne; var andv; var orv; var notv;
    lt := a < b;
    le := a <= b;
    eq := a == b;
    ne := a != b;
    andv := a && b;
    orv := a || b;
    notv := !a;
    return lt, le, eq, ne, andv, orv, notv;
}
)");
    Interpreter it(p, 8);
    auto expect = [&](uint64_t a, uint64_t b, std::vector<uint64_t> want) {
        auto r = it.run(bind({{"a", a}, {"b", b}}));
        std::vector<uint64_t> got;
        for (const char* n : {"lt", "le", "eq", "ne", "andv", "orv", "notv"})
            got.push_back(r.returns.at(n));
        CHECK(got == want);
    };
    expect(3, 7, {1, 1, 0, 1, 1, 1, 0});
    expect(0, 0, {0, 1, 1, 0, 0, 0, 1});
}

TEST_CASE("shift beyond the width yields zero") {
    auto p = ts::load("def main(pub x, pub s) { var y; y := x << s; return y; }");
    Interpreter it(p, 8);
    CHECK(it.run(bind({{"x", 1}, {"s", 7}})).returns.at("y") == 128);
    CHECK(it.run(bind({{"x", 1}, {"s", 8}})).returns.at("y") == 0);
    CHECK(it.run(bind({{"x", 1}, {"s", 63}})).returns.at("y") == 0);
}

TEST_CASE("branch observations record the condition value") {
    auto p = ts::load(R"(
def main(pub x) {
    var y;
    if x == 1 then y := 10; else y := 20; fi
    return y;
}
)");
    Interpreter it(p, 8);
    auto r1 = it.run(bind({{"x", 1}}));
    REQUIRE(r1.trace.size() == 1);
    CHECK(r1.trace[0].kind == EventKind::Branch);
    CHECK(r1.trace[0].value == 1);
    CHECK(r1.returns.at("y") == 10);
    auto r0 = it.run(bind({{"x", 0}}));
    CHECK(r0.trace[0].value == 0);
    CHECK(r0.returns.at("y") == 20);
}

TEST_CASE("a loop with n iterations emits n plus one loop observations") {
    auto p = ts::load(R"(
def main(pub n) {
    var i;
    i := 0;
    while i < n do
        i := i + 1;
    od
    return i;
}
)");
    Interpreter it(p, 8);
    for (uint64_t n : {0u, 1u, 3u, 7u}) {
        auto r = it.run(bind({{"n", n}}));
        size_t loops = 0;
        for (const auto& ev : r.trace)
            if (ev.kind == EventKind::Loop) ++loops;
        CHECK(loops == n + 1);
        CHECK(r.trace.back().value == 0);
    }
}

TEST_CASE("loads and stores with variable index are observed, literal index is silent") {
    auto p = ts::load(R"(
def main(pub i, sec k) {
    array a[4]; var v;
    a[0] := k;
    v := a[i];
    a[i] := v + 1;
    return v;
}
)");
    Interpreter it(p, 8);
    auto r = it.run(bind({{"i", 2}, {"k", 9}}));
    REQUIRE(r.status == RunStatus::Complete);
    std::vector<EventKind> kinds;
    for (const auto& ev : r.trace) kinds.push_back(ev.kind);
    CHECK(kinds == std::vector<EventKind>{EventKind::LoadIdx, EventKind::StoreIdx});
    CHECK(r.trace[0].value == 2);
    CHECK(r.trace[1].value == 2);
}

TEST_CASE("failed asserts make the run stuck without emitting the access event") {
    auto p = ts::load(R"(
def main(pub i) {
    array a[4]; var v;
    v := a[i];
    return v;
}
)");
    Interpreter it(p, 8);
    auto ok = it.run(bind({{"i", 3}}));
    CHECK(ok.status == RunStatus::Complete);
    auto bad = it.run(bind({{"i", 4}}));
    CHECK(bad.status == RunStatus::Stuck);
    CHECK(bad.trace.empty());
}

TEST_CASE("division by zero gets stuck, otherwise it is unsigned") {
    auto p = ts::load("def main(pub a, pub b) { var q; var r; q := a / b; r := a % b; return q, r; }");
    Interpreter it(p, 8);
    auto r = it.run(bind({{"a", 7}, {"b", 2}}));
    CHECK(r.returns.at("q") == 3);
    CHECK(r.returns.at("r") == 1);
    CHECK(it.run(bind({{"a", 7}, {"b", 0}})).status == RunStatus::Stuck);
}

TEST_CASE("assume false blocks the run") {
    auto p = ts::load("def main(pub x) { var y; assume x == 1; y := x; return y; }");
    Interpreter it(p, 8);
    CHECK(it.run(bind({{"x", 1}})).status == RunStatus::Complete);
    CHECK(it.run(bind({{"x", 0}})).status == RunStatus::Blocked);
}

TEST_CASE("calls pass scalars by value and arrays by reference") {
    auto p = ts::load(R"(
def bump(a[3], i) {
    var old;
    old := a[i];
    a[i] := old + 1;
    i := 0;
    return old;
}
def main(pub j, sec s[3]) {
    var o; var after; var jj;
    jj := j;
    o := bump(s, jj);
    after := s[jj];
    return o, after, jj;
}
)");
    Interpreter it(p, 8);
    auto r = it.run(bind({{"j", 1}}, {{"s", {5, 6, 7}}}));
    REQUIRE(r.status == RunStatus::Complete);
    CHECK(r.returns.at("o") == 6);
    CHECK(r.returns.at("after") == 7);
    CHECK(r.returns.at("jj") == 1);
}

TEST_CASE("uninitialized locals and arrays read as zero") {
    auto p = ts::load(R"(
def main(pub i) {
    array a[4]; var x; var v;
    v := a[i];
    return x, v;
}
)");
    Interpreter it(p, 8);
    auto r = it.run(bind({{"i", 1}}));
    CHECK(r.returns.at("x") == 0);
    CHECK(r.returns.at("v") == 0);
}

TEST_CASE("runs are deterministic") {
    auto p = normalize(parse_file(ts::corpus_path("example1_fixfrac.wh")));
    Interpreter it(p, 8);
    auto in = bind({{"k", 200}}, {{"frac", {3, 1, 2, 0}}});
    auto r1 = it.run(in);
    auto r2 = it.run(in);
    CHECK(r1.status == r2.status);
    CHECK(r1.returns == r2.returns);
    CHECK(r1.trace == r2.trace);
    CHECK(r1.steps == r2.steps);
}

TEST_CASE("fuel exhaustion stops divergent loops") {
    auto p = ts::load(R"(
def main(pub x) {
    var go;
    go := 1;
    while go do
        go := 1;
    od
    return go;
}
)");
    Interpreter it(p, 8);
    auto r = it.run(bind({{"x", 0}}), 1000);
    CHECK(r.status == RunStatus::FuelExhausted);
}

TEST_CASE("missing or malformed entry bindings are rejected") {
    auto p = ts::load("def main(pub x, sec a[2]) { var y; y := x; return y; }");
    Interpreter it(p, 8);
    CHECK_THROWS_AS(it.run(bind({{"x", 1}})), InputError);
    CHECK_THROWS_AS(it.run(bind({{"x", 1}}, {{"a", {1, 2, 3}}})), InputError);
    CHECK(it.run(bind({{"x", 1}}, {{"a", {1, 2}}})).status == RunStatus::Complete);
}

TEST_CASE("observer sees every labeled statement in execution order") {
    auto p = ts::load(R"(
def main(pub x) {
    var y;
    y := x + 1;
    y := y * 2;
    return y;
}
)");
    Interpreter it(p, 8);
    std::vector<int> seen;
    it.observer = [&](int label) { seen.push_back(label); };
    it.run(bind({{"x", 1}}));
    CHECK(seen == std::vector<int>{0, 1});
}

TEST_CASE("trace lines match the observation format") {
    Event e{7, EventKind::LoadIdx, 3};
    CHECK(trace_line(e) == "7:load=3");
    Event b{0, EventKind::Branch, 1};
    CHECK(trace_line(b) == "0:branch=1");
    Event l{2, EventKind::Loop, 0};
    CHECK(trace_line(l) == "2:loop=0");
    Event s{9, EventKind::StoreIdx, 14};
    CHECK(trace_line(s) == "9:store=14");
}
