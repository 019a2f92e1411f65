#include <doctest.h>

#include <sstream>

#include "ctprover/interp.hpp"
#include "ctprover/preanalysis.hpp"
#include "test_support.hpp"

using namespace ctprover;

TEST_CASE("callgraph of a single procedure has one node and no edges") {
    auto p = ts::load("def main(pub x) { var y; y := x; return y; }");
    auto cg = build_callgraph(p);
    CHECK(cg.nodes == std::vector<std::string>{"main"});
    CHECK(cg.edges.empty());
}

TEST_CASE("two calls to the same procedure yield two edges") {
    auto p = ts::load(R"(
def f(x) { var r; r := x + 1; return r; }
def main(pub a) {
    var u; var v;
    u := f(a);
    v := f(u);
    return v;
}
)");
    auto cg = build_callgraph(p);
    REQUIRE(cg.edges.size() == 2);
    CHECK(cg.edges[0].caller == "main");
    CHECK(cg.edges[0].callee == "f");
    CHECK(cg.edges[1].callee == "f");
    CHECK(cg.edges[0].label != cg.edges[1].label);
}

TEST_CASE("diamond call graph places the shared callee last in topo order") {
    auto p = ts::load(R"(
def h(x) { var r; r := x; return r; }
def f(x) { var r; r := h(x); return r; }
def g(x) { var r; r := h(x); return r; }
def main(pub a) {
    var u; var v;
    u := f(a);
    v := g(a);
    return v;
}
)");
    auto cg = build_callgraph(p);
    REQUIRE(cg.topo_order.size() == 4);
    CHECK(cg.topo_order.front() == "main");
    CHECK(cg.topo_order.back() == "h");
}

TEST_CASE("unreachable procedures are not callgraph nodes") {
    auto p = ts::load(R"(
def dead(x) { var r; r := x; return r; }
def main(pub a) { var y; y := a; return y; }
)");
    auto cg = build_callgraph(p);
    CHECK(cg.nodes == std::vector<std::string>{"main"});
}

TEST_CASE("straight line program wires n nodes in a chain") {
    auto p = ts::load(R"(
def main(pub x) {
    var a; var b; var c;
    a := x;
    b := a + 1;
    c := b + 2;
    return c;
}
)");
    auto g = build_icfg(p);
    int exit = g.exit_label.at("main");
    CHECK(g.entry_label.at("main") == 0);
    CHECK(g.intra_succ.at(0) == std::vector<int>{1});
    CHECK(g.intra_succ.at(1) == std::vector<int>{2});
    CHECK(g.intra_succ.at(2) == std::vector<int>{exit});
    CHECK(g.nodes.size() == 4);  // 3 statements + exit
}

TEST_CASE("a while node has a body edge, a back edge and an exit edge") {
    auto p = ts::load(R"(
def main(pub n) {
    var i; var go;
    i := 0;
    go := i < n;
    while go do
        i := i + 1;
        go := i < n;
    od
    return i;
}
)");
    auto g = build_icfg(p);
    int wl = -1;
    for (const auto& [l, n] : g.nodes)
        if (n.stmt && n.stmt->is<Stmt::While>()) wl = l;
    REQUIRE(wl >= 0);
    auto succ = g.intra_succ.at(wl);
    REQUIRE(succ.size() == 2);
    CHECK(succ[0] == wl + 1);                      // into the body
    CHECK(succ[1] == g.exit_label.at("main"));     // exit edge
    // last body statement loops back
    bool back = false;
    for (const auto& [from, tos] : g.intra_succ)
        for (int to : tos)
            if (to == wl && from > wl) back = true;
    CHECK(back);
}

TEST_CASE("if nodes have two successors which rejoin") {
    auto p = ts::load(R"(
def main(pub x) {
    var y; var t;
    t := x == 0;
    if t then y := 1; else y := 2; fi
    y := y + 1;
    return y;
}
)");
    auto g = build_icfg(p);
    int il = -1;
    for (const auto& [l, n] : g.nodes)
        if (n.stmt && n.stmt->is<Stmt::If>()) il = l;
    REQUIRE(il >= 0);
    auto succ = g.intra_succ.at(il);
    REQUIRE(succ.size() == 2);
    int join = -1;
    for (const auto& [l, n] : g.nodes)
        if (n.stmt && n.stmt->is<Stmt::Assign>() && l > succ[1]) join = l;
    REQUIRE(join >= 0);
    CHECK(g.intra_succ.at(succ[0]) == std::vector<int>{join});
    CHECK(g.intra_succ.at(succ[1]) == std::vector<int>{join});
}

TEST_CASE("calls get call and return edges") {
    auto p = ts::load(R"(
def f(x) { var r; r := x + 1; return r; }
def main(pub a) {
    var u;
    u := f(a);
    u := u + 1;
    return u;
}
)");
    auto g = build_icfg(p);
    REQUIRE(g.call_edges.size() == 1);
    REQUIRE(g.return_edges.size() == 1);
    auto [cl, ce] = g.call_edges[0];
    CHECK(g.nodes.at(cl).stmt->is<Stmt::Call>());
    CHECK(ce == g.entry_label.at("f"));
    auto [re_from, re_to] = g.return_edges[0];
    CHECK(re_from == g.exit_label.at("f"));
    CHECK(g.intra_succ.at(cl) == std::vector<int>{re_to});
}

TEST_CASE("icfg dump lists one edge per line") {
    auto p = ts::load("def main(pub x) { var y; y := x; y := y + 1; return y; }");
    auto text = dump_icfg(build_icfg(p));
    std::istringstream is(text);
    std::string line;
    int edges = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        CHECK(line.find(" -> ") != std::string::npos);
        ++edges;
    }
    CHECK(edges == 2);
}

TEST_CASE("simple def use chain covers an assignment pair") {
    auto p = ts::load(R"(
def main(pub x) {
    var a; var y;
    a := 1;
    y := a;
    return y;
}
)");
    auto du = def_use(p, build_icfg(p));
    CHECK(du.reaching_scalar(1, "a") == std::set<int>{0});
    CHECK(du.chain_uses("a", 0, false) == std::set<int>{1});
}

TEST_CASE("defs before and inside a loop both reach a use after it") {
    auto p = ts::load(R"(
def main(pub n) {
    var x; var i; var go; var y;
    x := 1;
    i := 0;
    go := i < n;
    while go do
        x := x + 1;
        i := i + 1;
        go := i < n;
    od
    y := x;
    return y;
}
)");
    auto du = def_use(p, build_icfg(p));
    int use_label = -1;
    for_each_stmt(*p.entry_proc().body, [&](const Stmt& s) {
        if (s.is<Stmt::Assign>() && s.as<Stmt::Assign>().lhs == "y") use_label = s.label;
    });
    REQUIRE(use_label >= 0);
    auto defs = du.reaching_scalar(use_label, "x");
    CHECK(defs.size() == 2);  // x := 1 and the in-loop x := x + 1
}

TEST_CASE("array chains are whole array and stores never kill") {
    auto p = ts::load(R"(
def main(pub i, pub j) {
    array a[4];
    var v;
    a[i] := 1;
    a[j] := 2;
    v := a[i];
    return v;
}
)");
    auto du = def_use(p, build_icfg(p));
    int load_label = -1;
    std::set<int> store_labels;
    for_each_stmt(*p.entry_proc().body, [&](const Stmt& s) {
        if (s.is<Stmt::Load>()) load_label = s.label;
        if (s.is<Stmt::Store>()) store_labels.insert(s.label);
    });
    auto defs = du.reaching_array(load_label, "a");
    for (int sl : store_labels) CHECK(defs.count(sl));
    CHECK(defs.count(DefUse::kEntryDef));  // zero-initialized declaration
}

TEST_CASE("entry parameters are definitions and returns are uses at the exit") {
    auto p = ts::load(R"(
def f(x) { var r; r := x; return r; }
def main(pub a) { var y; y := f(a); return y; }
)");
    auto g = build_icfg(p);
    auto du = def_use(p, g);
    int f_exit = g.exit_label.at("f");
    CHECK(du.scalar_uses.at("r").count(f_exit));
    // the param x is read inside f and its def is the entry
    CHECK(du.scalar_defs.at("x").count(DefUse::kEntryDef));
}

TEST_CASE("call sites are pseudo definitions for array arguments") {
    auto p = ts::load(R"(
def fill(a[2], v) {
    var z;
    a[0] := v;
    z := 0;
    return z;
}
def main(pub x) {
    array m[2];
    var z; var w;
    z := fill(m, x);
    w := m[1];
    return w;
}
)");
    auto g = build_icfg(p);
    auto du = def_use(p, g);
    int call_label = -1, load_label = -1;
    for_each_stmt(*p.find_proc("main")->body, [&](const Stmt& s) {
        if (s.is<Stmt::Call>()) call_label = s.label;
        if (s.is<Stmt::Load>()) load_label = s.label;
    });
    REQUIRE(call_label >= 0);
    REQUIRE(load_label >= 0);
    CHECK(du.array_defs.at("m").count(call_label));
    CHECK(du.reaching_array(load_label, "m").count(call_label));
    CHECK(du.array_uses.at("m").count(call_label));
}

// Dynamic soundness: replay programs and verify that every runtime read is
// covered by a chain from the def that actually wrote the value (entry
// bindings and call-site pseudo-defs standing in for their statements).
namespace {

struct ChainChecker {
    const Program& p;
    const Icfg& g;
    const DefUse& du;
    Interpreter& interp;
    bool ok = true;

    struct Frame {
        std::string callee;
        int call_label;
        StmtAccess defs;  // applied when control returns to the caller
    };
    std::vector<Frame> stack;
    std::map<std::string, int> writer;  // var -> def site that produced its value

    void apply_entry(const Procedure& pr) {
        for (const auto& prm : pr.params) writer[prm.name] = DefUse::kEntryDef;
        for (const auto& l : pr.locals) writer[l] = DefUse::kEntryDef;
        for (const auto& d : pr.local_arrays) writer[d.name] = DefUse::kEntryDef;
    }

    void check_use(int label, const std::string& var, bool is_array) {
        auto it = writer.find(var);
        int w = it == writer.end() ? DefUse::kEntryDef : it->second;
        const auto& reach =
            is_array ? du.reaching_array(label, var) : du.reaching_scalar(label, var);
        if (!reach.count(w)) ok = false;
    }

    void on_label(int label) {
        const auto& proc = g.proc_of(label);
        while (!stack.empty() && proc != stack.back().callee) {
            // returned from a call: ret vars are read at the callee exit,
            // then the call's own defs land in the caller
            const Frame& f = stack.back();
            int exit = g.exit_label.at(f.callee);
            for (const auto& r : p.find_proc(f.callee)->returns) check_use(exit, r, false);
            for (const auto& v : f.defs.scalar_defs) writer[v] = f.call_label;
            for (const auto& v : f.defs.array_defs) writer[v] = f.call_label;
            stack.pop_back();
        }
        const Stmt* s = g.nodes.at(label).stmt;
        StmtAccess a = stmt_access(*s);
        if (auto* c = std::get_if<Stmt::Call>(&s->node)) {
            const Procedure* callee = p.find_proc(c->callee);
            for (size_t i = 0; i < c->args.size(); ++i) {
                if (!callee->params[i].is_array) continue;
                const auto& name = c->args[i].var;
                auto& r = a.scalar_reads;
                r.erase(std::remove(r.begin(), r.end(), name), r.end());
                check_use(label, name, true);
                a.array_defs.push_back(name);
            }
            for (const auto& v : a.scalar_reads) check_use(label, v, false);
            stack.push_back({c->callee, label, a});
            apply_entry(*callee);
            return;
        }
        for (const auto& v : a.scalar_reads) check_use(label, v, false);
        for (const auto& v : a.array_reads) check_use(label, v, true);
        for (const auto& v : a.scalar_defs) writer[v] = label;
        for (const auto& v : a.array_defs) writer[v] = label;
    }

    void finish(const RunResult& res) {
        if (res.status != RunStatus::Complete) return;
        while (!stack.empty()) {
            const Frame& f = stack.back();
            int exit = g.exit_label.at(f.callee);
            for (const auto& r : p.find_proc(f.callee)->returns) check_use(exit, r, false);
            for (const auto& v : f.defs.scalar_defs) writer[v] = f.call_label;
            for (const auto& v : f.defs.array_defs) writer[v] = f.call_label;
            stack.pop_back();
        }
        int exit = g.exit_label.at(p.entry);
        for (const auto& r : p.entry_proc().returns) check_use(exit, r, false);
    }
};

bool chains_sound(const Program& p, const InputBinding& in) {
    auto g = build_icfg(p);
    auto du = def_use(p, g);
    Interpreter interp(p, 4);
    ChainChecker ck{p, g, du, interp};
    ck.apply_entry(p.entry_proc());
    interp.observer = [&](int label) { ck.on_label(label); };
    auto res = interp.run(in);
    ck.finish(res);
    return ck.ok;
}

}  // namespace

TEST_CASE("chains cover every runtime read across loops and calls") {
    auto p = ts::load(R"(
def scale(a[2], f) {
    var t0; var t1;
    t0 := a[0];
    a[0] := t0 * f;
    t1 := a[1];
    a[1] := t1 * f;
    return t0, t1;
}
def main(pub n, sec k) {
    array buf[2];
    var i; var go; var u; var v; var acc;
    buf[0] := k;
    buf[1] := n;
    i := 0;
    go := i < n;
    while go do
        u, v := scale(buf, i);
        acc := acc + u + v;
        i := i + 1;
        go := i < n;
    od
    return acc;
}
)");
    for (uint64_t n = 0; n < 4; ++n) {
        InputBinding in;
        in.scalars = {{"n", n}, {"k", 5}};
        CHECK(chains_sound(p, in));
    }
}

TEST_CASE("chains cover branchy programs on both paths") {
    auto p = ts::load(R"(
def main(pub x) {
    var y; var t;
    t := x == 0;
    if t then y := 1; else y := x + 2; fi
    y := y + x;
    return y;
}
)");
    for (uint64_t x = 0; x < 4; ++x) {
        InputBinding in;
        in.scalars = {{"x", x}};
        CHECK(chains_sound(p, in));
    }
}
