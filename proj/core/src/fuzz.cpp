#include "ctprover/fuzz.hpp"

#include <random>
#include <sstream>
#include <vector>

#include "ctprover/errors.hpp"
#include "ctprover/normalize.hpp"
#include "ctprover/parser.hpp"

namespace ctprover {

namespace {

constexpr int kArrayLen = 4;

class Gen {
public:
    Gen(uint64_t seed, int budget, uint32_t feat)
        : rng_(seed), budget_(budget < 2 ? 2 : budget), feat_(feat) {}

    std::string source() {
        int n_pub = 1 + pick(2);
        int n_sec = 1 + pick(2);
        for (int i = 0; i < n_pub; i++) pubs_.push_back("p" + std::to_string(i));
        for (int i = 0; i < n_sec; i++) secs_.push_back("k" + std::to_string(i));
        int n_var = 3 + pick(3);
        for (int i = 0; i < n_var; i++) {
            scalars_.push_back("v" + std::to_string(i));
            decls_.push_back(scalars_.back());
        }

        // one statement is forced to read a secret
        stmt_assign(secs_[pick(secs_.size())]);
        while (budget_ > 0) stmt();
        if (feat_ & kGenArrays) forced_load();

        std::ostringstream out;
        out << "def main(";
        bool first = true;
        for (const auto& p : pubs_) {
            out << (first ? "" : ", ") << "pub " << p;
            first = false;
        }
        for (const auto& k : secs_) out << ", sec " << k;
        out << ") {\n";
        for (const auto& d : decls_) out << "    var " << d << ";\n";
        if (feat_ & kGenArrays) out << "    array a0[" << kArrayLen << "];\n";
        out << body_.str();
        out << "    return " << scalars_[pick(scalars_.size())] << ";\n";
        out << "}\n";
        return out.str();
    }

private:
    size_t pick(size_t n) { return n ? rng_() % n : 0; }
    bool chance(int pct) { return static_cast<int>(rng_() % 100) < pct; }

    void line(const std::string& s) {
        for (int i = 0; i < indent_; i++) body_ << "    ";
        body_ << s << "\n";
    }

    std::string fresh(const char* prefix) {
        std::string n = prefix + std::to_string(next_++);
        decls_.push_back(n);
        return n;
    }

    std::string read_var() {
        if (chance(25)) return secs_[pick(secs_.size())];
        size_t n = scalars_.size() + pubs_.size() + secs_.size() + counters_.size();
        size_t i = pick(n);
        if (i < scalars_.size()) return scalars_[i];
        i -= scalars_.size();
        if (i < pubs_.size()) return pubs_[i];
        i -= pubs_.size();
        if (i < secs_.size()) return secs_[i];
        return counters_[i - secs_.size()];
    }

    std::string expr(int depth) {
        if (depth <= 0 || chance(30))
            return chance(50) ? read_var() : std::to_string(pick(16));
        if (chance(12)) {
            const char* un[] = {"~", "-", "!"};
            return std::string(un[pick(3)]) + expr(depth - 1);
        }
        static const char* ops[] = {"+", "-",  "*",  "&",  "|",  "^",  "<<", ">>",
                                    "<", "<=", "==", "!=", "&&", "||", ">",  ">="};
        const char* op = chance(6) ? (chance(50) ? "/" : "%") : ops[pick(16)];
        return "(" + expr(depth - 1) + " " + op + " " + expr(depth - 1) + ")";
    }

    void stmt_assign(const std::string& forced_read = "") {
        std::string rhs = forced_read.empty()
                              ? expr(2)
                              : "(" + forced_read + " " + (chance(50) ? "^" : "+") + " " +
                                    expr(1) + ")";
        line(scalars_[pick(scalars_.size())] + " := " + rhs + ";");
        budget_--;
    }

    std::string index_var() {
        std::string j = fresh("j");
        line(j + " := (" + expr(1) + " & " + std::to_string(kArrayLen - 1) + ");");
        line("assert (" + j + " < " + std::to_string(kArrayLen) + ");");
        budget_ -= 2;
        return j;
    }

    void stmt_store() {
        std::string idx =
            chance(40) ? std::to_string(pick(kArrayLen)) : index_var();
        line("a0[" + idx + "] := " + expr(1) + ";");
        budget_--;
    }

    void stmt_load() {
        std::string idx = chance(40) ? std::to_string(pick(kArrayLen)) : index_var();
        line(scalars_[pick(scalars_.size())] + " := a0[" + idx + "];");
        budget_--;
    }

    void stmt_if() {
        std::string c = scalars_[pick(scalars_.size())];
        line(c + " := " + expr(2) + ";");
        line("if " + c + " then");
        budget_ -= 2;
        indent_++;
        int n = 1 + static_cast<int>(pick(2));
        for (int i = 0; i < n && budget_ > 0; i++) simple_stmt();
        indent_--;
        line("else");
        indent_++;
        if (chance(70))
            simple_stmt();
        else
            line("skip;");
        indent_--;
        line("fi");
    }

    void stmt_while() {
        std::string i = fresh("i"), g = fresh("g");
        std::string bound =
            chance(50) ? std::to_string(1 + pick(4)) : "(" + pubs_[pick(pubs_.size())] + " & 3)";
        line(i + " := 0;");
        line(g + " := (" + i + " < " + bound + ");");
        line("while " + g + " do");
        budget_ -= 3;
        indent_++;
        int n = 1 + static_cast<int>(pick(3));
        for (int k = 0; k < n && budget_ > 0; k++) simple_stmt();
        line(i + " := (" + i + " + 1);");
        line(g + " := (" + i + " < " + bound + ");");
        indent_--;
        line("od");
        counters_.push_back(i);
        loops_++;
    }

    // statements allowed inside bodies: no loops, no nested branching
    void simple_stmt() {
        if ((feat_ & kGenArrays) && chance(30)) {
            chance(50) ? stmt_store() : stmt_load();
            return;
        }
        stmt_assign();
    }

    void stmt() {
        if ((feat_ & kGenLoops) && loops_ < 2 && budget_ >= 5 && chance(30)) {
            stmt_while();
            return;
        }
        if ((feat_ & kGenBranches) && budget_ >= 3 && chance(35)) {
            stmt_if();
            return;
        }
        if ((feat_ & kGenArrays) && chance(25)) {
            chance(50) ? stmt_store() : stmt_load();
            return;
        }
        stmt_assign();
    }

    void forced_load() {
        // guarantees at least one load through a bounds-checked variable index
        std::string j = fresh("j");
        line(j + " := (" + pubs_[0] + " & " + std::to_string(kArrayLen - 1) + ");");
        line("assert (" + j + " < " + std::to_string(kArrayLen) + ");");
        line(scalars_[0] + " := a0[" + j + "];");
    }

    std::mt19937_64 rng_;
    int budget_;
    uint32_t feat_;
    std::ostringstream body_;
    std::vector<std::string> pubs_, secs_, scalars_, counters_, decls_;
    int next_ = 0;
    int indent_ = 1;
    int loops_ = 0;
};

}  // namespace

std::string generate_source(uint64_t seed, int budget, uint32_t features) {
    return Gen(seed, budget, features).source();
}

Program generate_random_program(uint64_t seed, int budget, uint32_t features) {
    return normalize(parse(generate_source(seed, budget, features)));
}

}  // namespace ctprover
