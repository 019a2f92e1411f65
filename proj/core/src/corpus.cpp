#include "ctprover/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ctprover/errors.hpp"
#include "ctprover/normalize.hpp"
#include "ctprover/oracle.hpp"
#include "ctprover/parser.hpp"

namespace ctprover {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string dir_of(const std::string& path) {
    size_t p = path.find_last_of('/');
    return p == std::string::npos ? std::string(".") : path.substr(0, p);
}

}  // namespace

std::vector<CorpusCase> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest: " + path);
    std::string dir = dir_of(path);
    std::vector<CorpusCase> cases;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        size_t q1 = line.find('"');
        size_t q2 = line.rfind('"');
        if (eq == std::string::npos || q1 == std::string::npos || q2 <= q1)
            throw InputError("manifest line " + std::to_string(lineno) +
                             ": expected name = \"verdict profile width\"");
        CorpusCase c;
        c.name = trim(line.substr(0, eq));
        std::istringstream fields(line.substr(q1 + 1, q2 - q1 - 1));
        if (!(fields >> c.verdict >> c.profile >> c.width))
            throw InputError("manifest line " + std::to_string(lineno) + ": bad value for " +
                             c.name);
        c.path = dir + "/" + c.name + ".wh";
        cases.push_back(std::move(c));
    }
    std::sort(cases.begin(), cases.end(),
              [](const CorpusCase& a, const CorpusCase& b) { return a.name < b.name; });
    return cases;
}

CorpusSummary run_corpus(const CorpusConfig& cfg) {
    CorpusSummary sum;
    for (const auto& c : load_manifest(cfg.manifest)) {
        CaseResult res;
        res.name = c.name;
        try {
            Program p = normalize(parse_file(c.path));
            PipelineConfig pc;
            pc.name = c.name;
            pc.width = c.width;
            pc.unroll = cfg.unroll;
            pc.backend = cfg.backend;
            pc.deadline_s = cfg.deadline_s;
            res.report = run_pipeline(p, pc);

            std::string got_verdict = pipeline_verdict_text(res.report.verdict);
            std::string got_profile = profile_text(res.report);
            if (got_verdict != c.verdict)
                res.detail = "verdict " + got_verdict + ", expected " + c.verdict;
            else if (got_profile != c.profile)
                res.detail = "profile " + got_profile + ", expected " + c.profile;
            else if (cfg.check_oracle && c.width <= 4) {
                OracleResult o = oracle_check_ct(p, c.width);
                if (c.verdict == "proved" && !o.secure)
                    res.detail = "oracle found a divergence but the case expects proved";
                else if (c.verdict == "leaks_found" && o.secure && o.exhausted)
                    res.detail = "oracle exhausted the input space without a divergence";
            }
        } catch (const CtError& e) {
            res.detail = std::string("error: ") + e.what();
        }
        res.pass = res.detail.empty();
        (res.pass ? sum.passed : sum.failed)++;
        sum.results.push_back(std::move(res));
    }
    return sum;
}

std::string corpus_table(const CorpusSummary& s) {
    std::ostringstream os;
    size_t w = 4;
    for (const auto& r : s.results) w = std::max(w, r.name.size());
    for (const auto& r : s.results) {
        os << (r.pass ? "pass  " : "FAIL  ") << r.name;
        os << std::string(w - r.name.size() + 2, ' ');
        os << pipeline_verdict_text(r.report.verdict) << " " << profile_text(r.report);
        if (!r.detail.empty()) os << "  [" << r.detail << "]";
        os << "\n";
    }
    os << s.passed << " passed, " << s.failed << " failed\n";
    return os.str();
}

}  // namespace ctprover
