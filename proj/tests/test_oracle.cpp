#include <doctest.h>

#include "ctprover/errors.hpp"

#include "ctprover/oracle.hpp"
#include "test_support.hpp"

using namespace ctprover;

TEST_CASE("oracle accepts a program with no secret influence on observations") {
    auto p = ts::load(R"(
def main(pub x, sec k) {
    var y;
    if x == 0 then y := k; else y := k + 1; fi
    return y;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    CHECK(res.secure);
    CHECK(res.exhausted);
    CHECK(!res.witness.has_value());
}

TEST_CASE("oracle rejects a secret-dependent branch and yields a replayable witness") {
    auto p = ts::load(R"(
def main(pub x, sec k) {
    var y;
    if k == 1 then y := 1; else y := 0; fi
    return y;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    REQUIRE(!res.secure);
    REQUIRE(res.witness.has_value());
    const auto& w = *res.witness;
    CHECK(w.inputs1.scalars.at("x") == w.inputs2.scalars.at("x"));
    CHECK(w.inputs1.scalars.at("k") != w.inputs2.scalars.at("k"));
    CHECK(witness_replays(p, 4, w));
}

TEST_CASE("the exhaustive witness is the lexicographically least violating pair") {
    auto p = ts::load(R"(
def main(pub x, sec k) {
    var y;
    if k == 1 then y := 1; else y := 0; fi
    return y;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    REQUIRE(res.witness.has_value());
    // Publics enumerate from zero; k = 0 vs k = 1 is the first divergence.
    CHECK(res.witness->inputs1.scalars.at("x") == 0);
    CHECK(res.witness->inputs1.scalars.at("k") == 0);
    CHECK(res.witness->inputs2.scalars.at("k") == 1);
}

TEST_CASE("oracle catches secret-dependent loop trip counts") {
    auto p = ts::load(R"(
def main(sec n) {
    var i;
    i := 0;
    while i < n do
        i := i + 1;
    od
    return i;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    CHECK(!res.secure);
    REQUIRE(res.witness.has_value());
    CHECK(witness_replays(p, 4, *res.witness));
}

TEST_CASE("oracle catches secret-indexed loads") {
    auto p = ts::load(R"(
def main(sec k) {
    array t[4]; var v; var j;
    j := k & 3;
    v := t[j];
    return v;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    CHECK(!res.secure);
    CHECK(witness_replays(p, 4, *res.witness));
}

TEST_CASE("incomplete runs are skipped rather than compared") {
    // k = 0 and k = 1 run out of bounds and get stuck; the divergence shows
    // up only between the complete runs that follow them.
    auto p = ts::load(R"(
def main(sec k) {
    array a[4]; var v; var j;
    j := k - 2;
    v := a[j];
    return v;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    CHECK(!res.secure);
    CHECK(res.skipped_incomplete >= 2);
    REQUIRE(res.witness.has_value());
    CHECK(res.witness->inputs1.scalars.at("k") == 2);
    CHECK(res.witness->inputs2.scalars.at("k") == 3);
    CHECK(witness_replays(p, 4, *res.witness));
}

TEST_CASE("a fully masked lookup is secure at small width") {
    auto p = ts::load(R"(
def main(pub i, sec k) {
    array t[8]; var v; var j;
    t[0] := 1;
    t[1] := 2;
    j := i & 7;
    v := t[j] + k;
    return v;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    CHECK(res.secure);
    CHECK(res.exhausted);
}

TEST_CASE("array inputs participate in enumeration") {
    auto p = ts::load(R"(
def main(pub i, sec d[2]) {
    var v; var j;
    j := i & 1;
    v := d[j];
    if v == 0 then j := 0; else j := 1; fi
    return j;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    CHECK(!res.secure);
    REQUIRE(res.witness.has_value());
    CHECK(res.witness->inputs1.arrays.at("d") != res.witness->inputs2.arrays.at("d"));
    CHECK(witness_replays(p, 4, *res.witness));
}

TEST_CASE("requesting exhaustive mode over the bit cap throws") {
    auto p = ts::load("def main(sec a[4], sec b[4]) { var y; y := a[0]; return y; }");
    OracleLimits lim;
    lim.mode = OracleLimits::Mode::Exhaustive;
    lim.exhaustive_bit_cap = 20;
    CHECK_THROWS_AS(oracle_check_ct(p, 8, lim), CapExceededError);
}

TEST_CASE("sampling mode is deterministic per seed") {
    auto p = normalize(parse_file(ts::corpus_path("example1_fixfrac.wh")));
    OracleLimits lim;
    lim.mode = OracleLimits::Mode::Sample;
    lim.seed = 42;
    lim.sample_publics = 8;
    lim.sample_secrets = 8;
    auto r1 = oracle_check_ct(p, 8, lim);
    auto r2 = oracle_check_ct(p, 8, lim);
    CHECK(r1.secure == r2.secure);
    CHECK(r1.pairs_checked == r2.pairs_checked);
    CHECK(r1.runs == r2.runs);
    CHECK(r1.secure);
}

TEST_CASE("pair budget caps the search") {
    auto p = ts::load(R"(
def main(pub x, sec k) {
    var y;
    y := x + k;
    return y;
}
)");
    OracleLimits lim;
    lim.max_pairs = 3;
    auto res = oracle_check_ct(p, 8, lim);
    CHECK(res.secure);
    CHECK(!res.exhausted);
    CHECK(res.pairs_checked <= 3);
}

TEST_CASE("witness replay rejects a doctored witness") {
    auto p = ts::load(R"(
def main(pub x, sec k) {
    var y;
    if k == 1 then y := 1; else y := 0; fi
    return y;
}
)");
    auto res = oracle_check_ct(p, 4, {});
    REQUIRE(res.witness.has_value());
    auto w = *res.witness;
    w.inputs2.scalars["k"] = w.inputs1.scalars["k"];
    CHECK(!witness_replays(p, 4, w));
}
