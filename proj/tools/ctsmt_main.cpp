// ctsmt: a small QF_BV decision procedure over the project's term language.
// Reads one SMT-LIB2 script, conjoins its assertions, and enumerates the
// declared constants exhaustively. Prints sat with a model, unsat, or
// unknown when the search space exceeds the evaluation budget.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctprover/errors.hpp"
#include "ctprover/smtlib.hpp"
#include "ctprover/term.hpp"

using namespace ctprover;

namespace {

void print_model(const SmtScript& s, const TermEnv& env) {
    printf("sat\n(model\n");
    for (const auto& [name, w] : s.decls) {
        uint64_t v = 0;
        auto it = env.find(name);
        if (it != env.end()) v = it->second;
        printf("  (define-fun %s () (_ BitVec %d) #x%0*llx)\n", name.c_str(), w, (w + 3) / 4,
               static_cast<unsigned long long>(v));
    }
    printf(")\n");
}

}  // namespace

int main(int argc, char** argv) {
    uint64_t budget = 1ull << 24;
    const char* path = nullptr;
    for (int i = 1; i < argc; i++) {
        std::string a = argv[i];
        if (a == "--max-evals" && i + 1 < argc) {
            budget = strtoull(argv[++i], nullptr, 10);
        } else if (a == "--help") {
            printf("usage: ctsmt [--max-evals N] file.smt2\n");
            return 0;
        } else {
            path = argv[i];
        }
    }
    if (!path) {
        fprintf(stderr, "usage: ctsmt [--max-evals N] file.smt2\n");
        return 2;
    }

    std::ifstream in(path);
    if (!in) {
        fprintf(stderr, "ctsmt: cannot open %s\n", path);
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    SmtScript script;
    try {
        script = parse_smtlib(buf.str());
    } catch (const CtError& e) {
        printf("unknown\n");
        fprintf(stderr, "ctsmt: %s\n", e.what());
        return 0;
    }

    TermRef conj = script.tb->true_();
    for (const auto& a : script.asserts) conj = script.tb->and_(conj, a);
    if (conj == script.tb->false_()) {
        printf("unsat\n");
        return 0;
    }

    // space bound before enumerating
    uint64_t space = 1;
    for (const auto& [name, w] : script.decls) {
        (void)name;
        uint64_t dom = w >= 64 ? 0 : (1ull << w);
        if (dom == 0 || space > budget / dom) {
            printf("unknown\n");
            return 0;
        }
        space *= dom;
    }

    TermEnv env;
    for (const auto& [name, w] : script.decls) env[name] = 0;
    for (uint64_t it = 0; it < space; it++) {
        if (term_eval(*script.tb, conj, env) != 0) {
            print_model(script, env);
            return 0;
        }
        // odometer over declaration order
        for (auto& [name, w] : script.decls) {
            uint64_t mask = w >= 64 ? ~0ull : (1ull << w) - 1;
            env[name] = (env[name] + 1) & mask;
            if (env[name] != 0) break;
        }
    }
    printf("unsat\n");
    return 0;
}
