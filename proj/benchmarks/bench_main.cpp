#include <benchmark/benchmark.h>

#include "ctprover/interp.hpp"
#include "ctprover/normalize.hpp"
#include "ctprover/parser.hpp"
#include "ctprover/printer.hpp"

namespace {

std::string fixfrac_path() {
    return std::string(CTPROVER_SOURCE_DIR) + "/corpus/fixfrac.wh";
}

void bm_parse(benchmark::State& state) {
    auto src = [] {
        auto p = ctprover::parse_file(fixfrac_path());
        return ctprover::pretty_print(p);
    }();
    for (auto _ : state) {
        auto p = ctprover::parse(src);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(bm_parse);

void bm_normalize(benchmark::State& state) {
    auto raw = ctprover::parse_file(fixfrac_path());
    for (auto _ : state) {
        auto p = ctprover::normalize(ctprover::clone_program(raw));
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(bm_normalize);

void bm_interp(benchmark::State& state) {
    auto p = ctprover::normalize(ctprover::parse_file(fixfrac_path()));
    ctprover::Interpreter interp(p, 8);
    ctprover::InputBinding in;
    in.scalars["k"] = 77;
    in.arrays["frac"] = {3, 1, 2, 0};
    for (auto _ : state) {
        auto r = interp.run(in);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(bm_interp);

}  // namespace

BENCHMARK_MAIN();
