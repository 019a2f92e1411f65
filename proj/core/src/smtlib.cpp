#include "ctprover/smtlib.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sys/wait.h>
#include <unistd.h>

#include "ctprover/errors.hpp"

namespace ctprover {

namespace {

std::string hex_literal(uint64_t v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "#x%0*llx", width / 4,
                  static_cast<unsigned long long>(v));
    return buf;
}

// Postorder over the DAG reachable from root, each node once.
std::vector<TermRef> postorder(TermRef root) {
    std::vector<TermRef> order;
    std::vector<std::pair<TermRef, bool>> stack{{root, false}};
    std::set<TermRef> seen;
    while (!stack.empty()) {
        auto [t, expanded] = stack.back();
        stack.pop_back();
        if (expanded) {
            order.push_back(t);
            continue;
        }
        if (!seen.insert(t).second) continue;
        stack.emplace_back(t, true);
        for (int i = term_op_arity(t->op) - 1; i >= 0; i--)
            stack.emplace_back(t->args[i], false);
    }
    return order;
}

}  // namespace

std::string smtlib_text(const TermBuilder& tb, TermRef formula) {
    const int w = tb.width();
    const std::string zero = hex_literal(0, w);
    const std::string one = hex_literal(1, w);

    auto nodes = postorder(formula);
    std::map<TermRef, std::string> name;
    std::set<std::string> syms;
    for (TermRef t : nodes)
        if (t->is_sym()) syms.insert(t->sym);

    std::string out = "(set-logic QF_BV)\n";
    for (const auto& s : syms)
        out += "(declare-const " + s + " (_ BitVec " + std::to_string(w) + "))\n";

    auto ref = [&](TermRef t) -> std::string {
        if (t->is_const()) return hex_literal(t->value, w);
        if (t->is_sym()) return t->sym;
        return name.at(t);
    };
    auto wrap = [&](const std::string& b) { return "(ite " + b + " " + one + " " + zero + ")"; };
    auto truthy = [&](TermRef t) { return "(distinct " + ref(t) + " " + zero + ")"; };

    std::string lets;
    int lets_open = 0;
    int counter = 0;
    for (TermRef t : nodes) {
        if (t->is_const() || t->is_sym()) continue;
        std::string a = term_op_arity(t->op) >= 1 ? ref(t->args[0]) : "";
        std::string b = term_op_arity(t->op) >= 2 ? ref(t->args[1]) : "";
        std::string body;
        switch (t->op) {
            case TermOp::Add: body = "(bvadd " + a + " " + b + ")"; break;
            case TermOp::Sub: body = "(bvsub " + a + " " + b + ")"; break;
            case TermOp::Mul: body = "(bvmul " + a + " " + b + ")"; break;
            case TermOp::Div: body = "(bvudiv " + a + " " + b + ")"; break;
            case TermOp::Mod: body = "(bvurem " + a + " " + b + ")"; break;
            case TermOp::And: body = "(bvand " + a + " " + b + ")"; break;
            case TermOp::Or: body = "(bvor " + a + " " + b + ")"; break;
            case TermOp::Xor: body = "(bvxor " + a + " " + b + ")"; break;
            case TermOp::Shl: body = "(bvshl " + a + " " + b + ")"; break;
            case TermOp::Shr: body = "(bvlshr " + a + " " + b + ")"; break;
            case TermOp::Eq: body = wrap("(= " + a + " " + b + ")"); break;
            case TermOp::Ne: body = wrap("(distinct " + a + " " + b + ")"); break;
            case TermOp::Lt: body = wrap("(bvult " + a + " " + b + ")"); break;
            case TermOp::Le: body = wrap("(bvule " + a + " " + b + ")"); break;
            case TermOp::Gt: body = wrap("(bvugt " + a + " " + b + ")"); break;
            case TermOp::Ge: body = wrap("(bvuge " + a + " " + b + ")"); break;
            case TermOp::LogAnd:
                body = wrap("(and " + truthy(t->args[0]) + " " + truthy(t->args[1]) + ")");
                break;
            case TermOp::LogOr:
                body = wrap("(or " + truthy(t->args[0]) + " " + truthy(t->args[1]) + ")");
                break;
            case TermOp::Not: body = "(bvnot " + a + ")"; break;
            case TermOp::Neg: body = "(bvneg " + a + ")"; break;
            case TermOp::LogNot: body = wrap("(= " + a + " " + zero + ")"); break;
            case TermOp::Ite:
                body = "(ite " + truthy(t->args[0]) + " " + b + " " + ref(t->args[2]) + ")";
                break;
            case TermOp::Const:
            case TermOp::Sym:
                throw std::logic_error("smtlib_text: leaf in op position");
        }
        std::string n = "t" + std::to_string(counter++);
        lets += "(let ((" + n + " " + body + "))\n";
        lets_open++;
        name[t] = n;
    }

    out += "(assert " + lets + "(distinct " + ref(formula) + " " + zero + ")" +
           std::string(lets_open, ')') + ")\n";
    out += "(check-sat)\n(get-model)\n";
    return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> toks;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == ';') {
            while (i < text.size() && text[i] != '\n') i++;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            i++;
        } else if (c == '(' || c == ')') {
            toks.emplace_back(1, c);
            i++;
        } else {
            size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
                   text[j] != '(' && text[j] != ')' && text[j] != ';')
                j++;
            toks.push_back(text.substr(i, j - i));
            i = j;
        }
    }
    return toks;
}

bool parse_bv_literal(const std::string& tok, uint64_t& value, int& bits) {
    if (tok.size() > 2 && tok[0] == '#' && tok[1] == 'x') {
        value = std::strtoull(tok.c_str() + 2, nullptr, 16);
        bits = 4 * static_cast<int>(tok.size() - 2);
        return true;
    }
    if (tok.size() > 2 && tok[0] == '#' && tok[1] == 'b') {
        value = std::strtoull(tok.c_str() + 2, nullptr, 2);
        bits = static_cast<int>(tok.size() - 2);
        return true;
    }
    return false;
}

}  // namespace

SolverResult parse_solver_output(const std::string& text) {
    SolverResult r;
    size_t eol = text.find('\n');
    std::string first = text.substr(0, eol == std::string::npos ? text.size() : eol);
    while (!first.empty() && std::isspace(static_cast<unsigned char>(first.back())))
        first.pop_back();
    r.detail = first;
    if (first == "sat")
        r.status = SolverStatus::Sat;
    else if (first == "unsat")
        r.status = SolverStatus::Unsat;
    else
        r.status = SolverStatus::Unknown;
    if (r.status != SolverStatus::Sat) return r;

    auto toks = tokenize(text);
    for (size_t i = 0; i < toks.size(); i++) {
        if (toks[i] != "define-fun" || i + 1 >= toks.size()) continue;
        const std::string& name = toks[i + 1];
        for (size_t j = i + 2; j < std::min(toks.size(), i + 12); j++) {
            uint64_t v;
            int bits;
            if (parse_bv_literal(toks[j], v, bits)) {
                r.model[name] = v;
                break;
            }
            if (toks[j].size() > 2 && toks[j].compare(0, 2, "bv") == 0 &&
                std::isdigit(static_cast<unsigned char>(toks[j][2]))) {
                r.model[name] = std::strtoull(toks[j].c_str() + 2, nullptr, 10);
                break;
            }
        }
    }
    return r;
}

SolverResult run_solver(const std::string& cmd, const std::string& script,
                        double timeout_s) {
    char path[] = "/tmp/ctprover_vc_XXXXXX";
    int fd = mkstemp(path);
    if (fd < 0) {
        SolverResult r;
        r.detail = "cannot create temp file";
        return r;
    }
    {
        FILE* f = fdopen(fd, "w");
        std::fwrite(script.data(), 1, script.size(), f);
        std::fclose(f);
    }
    long secs = std::lround(std::ceil(std::max(1.0, timeout_s)));
    std::string full = "timeout " + std::to_string(secs) + " " + cmd + " '" + path +
                       "' 2>/dev/null";
    std::string out;
    SolverResult r;
    FILE* pipe = popen(full.c_str(), "r");
    if (!pipe) {
        r.detail = "spawn failed: " + cmd;
        std::remove(path);
        return r;
    }
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    std::remove(path);
    if (WIFEXITED(status) && WEXITSTATUS(status) == 124) {
        r.detail = "timeout";
        return r;
    }
    return parse_solver_output(out);
}

namespace {

struct Sexpr {
    std::string atom;            // empty for lists
    std::vector<Sexpr> items;
    bool is_list = false;
};

Sexpr parse_sexpr(const std::vector<std::string>& toks, size_t& i) {
    if (i >= toks.size()) throw CtError("smtlib: unexpected end of input");
    if (toks[i] == "(") {
        Sexpr s;
        s.is_list = true;
        i++;
        while (i < toks.size() && toks[i] != ")") s.items.push_back(parse_sexpr(toks, i));
        if (i >= toks.size()) throw CtError("smtlib: unbalanced parenthesis");
        i++;
        return s;
    }
    Sexpr s;
    s.atom = toks[i++];
    return s;
}

// Variable environment for let scopes; declared constants become symbols.
using SmtEnv = std::map<std::string, TermRef>;

TermRef eval_smt(const Sexpr& e, TermBuilder& tb, const SmtEnv& env,
                 const std::set<std::string>& decls);

TermRef fold_nary(TermOp op, const Sexpr& e, TermBuilder& tb, const SmtEnv& env,
                  const std::set<std::string>& decls) {
    if (e.items.size() < 3) throw CtError("smtlib: operator needs arguments");
    TermRef acc = eval_smt(e.items[1], tb, env, decls);
    for (size_t i = 2; i < e.items.size(); i++)
        acc = tb.app(op, acc, eval_smt(e.items[i], tb, env, decls));
    return acc;
}

TermRef eval_smt(const Sexpr& e, TermBuilder& tb, const SmtEnv& env,
                 const std::set<std::string>& decls) {
    if (!e.is_list) {
        uint64_t v;
        int bits;
        if (parse_bv_literal(e.atom, v, bits)) return tb.constant(v);
        if (e.atom == "true") return tb.true_();
        if (e.atom == "false") return tb.false_();
        auto it = env.find(e.atom);
        if (it != env.end()) return it->second;
        if (decls.count(e.atom)) return tb.sym(e.atom);
        throw CtError("smtlib: unknown identifier '" + e.atom + "'");
    }
    if (e.items.empty()) throw CtError("smtlib: empty application");
    const std::string& head = e.items[0].atom;

    if (head == "_") {
        // (_ bvN w)
        if (e.items.size() != 3 || e.items[1].atom.compare(0, 2, "bv") != 0)
            throw CtError("smtlib: unsupported indexed identifier");
        return tb.constant(std::strtoull(e.items[1].atom.c_str() + 2, nullptr, 10));
    }
    if (head == "let") {
        SmtEnv inner = env;
        for (const auto& bind : e.items[1].items) {
            if (!bind.is_list || bind.items.size() != 2)
                throw CtError("smtlib: malformed let binding");
            // parallel let: right-hand sides see the outer scope
            inner[bind.items[0].atom] = eval_smt(bind.items[1], tb, env, decls);
        }
        return eval_smt(e.items[2], tb, inner, decls);
    }

    auto arg = [&](size_t i) { return eval_smt(e.items[i], tb, env, decls); };
    auto binary = [&](TermOp op) {
        if (e.items.size() != 3) throw CtError("smtlib: '" + head + "' expects 2 arguments");
        return tb.app(op, arg(1), arg(2));
    };

    if (head == "bvadd") return fold_nary(TermOp::Add, e, tb, env, decls);
    if (head == "bvsub") return binary(TermOp::Sub);
    if (head == "bvmul") return fold_nary(TermOp::Mul, e, tb, env, decls);
    if (head == "bvudiv") return binary(TermOp::Div);
    if (head == "bvurem") return binary(TermOp::Mod);
    if (head == "bvand") return fold_nary(TermOp::And, e, tb, env, decls);
    if (head == "bvor") return fold_nary(TermOp::Or, e, tb, env, decls);
    if (head == "bvxor") return fold_nary(TermOp::Xor, e, tb, env, decls);
    if (head == "bvshl") return binary(TermOp::Shl);
    if (head == "bvlshr") return binary(TermOp::Shr);
    if (head == "bvult") return binary(TermOp::Lt);
    if (head == "bvule") return binary(TermOp::Le);
    if (head == "bvugt") return binary(TermOp::Gt);
    if (head == "bvuge") return binary(TermOp::Ge);
    if (head == "bvnot") return tb.app(TermOp::Not, arg(1));
    if (head == "bvneg") return tb.app(TermOp::Neg, arg(1));
    if (head == "not") return tb.bool_not(arg(1));
    if (head == "and") {
        if (e.items.size() == 1) return tb.true_();
        return fold_nary(TermOp::LogAnd, e, tb, env, decls);
    }
    if (head == "or") {
        if (e.items.size() == 1) return tb.false_();
        return fold_nary(TermOp::LogOr, e, tb, env, decls);
    }
    if (head == "xor") return binary(TermOp::Ne);
    if (head == "=>") {
        if (e.items.size() != 3) throw CtError("smtlib: '=>' expects 2 arguments");
        return tb.or_(tb.bool_not(arg(1)), arg(2));
    }
    if (head == "=") {
        // chain: (= a b c) holds iff all equal
        if (e.items.size() < 3) throw CtError("smtlib: '=' expects arguments");
        TermRef acc = tb.true_();
        TermRef prev = arg(1);
        for (size_t i = 2; i < e.items.size(); i++) {
            TermRef cur = eval_smt(e.items[i], tb, env, decls);
            acc = tb.and_(acc, tb.eq(prev, cur));
            prev = cur;
        }
        return acc;
    }
    if (head == "distinct") {
        if (e.items.size() < 3) throw CtError("smtlib: 'distinct' expects arguments");
        std::vector<TermRef> xs;
        for (size_t i = 1; i < e.items.size(); i++) xs.push_back(arg(i));
        TermRef acc = tb.true_();
        for (size_t i = 0; i < xs.size(); i++)
            for (size_t j = i + 1; j < xs.size(); j++)
                acc = tb.and_(acc, tb.ne(xs[i], xs[j]));
        return acc;
    }
    if (head == "ite") {
        if (e.items.size() != 4) throw CtError("smtlib: 'ite' expects 3 arguments");
        return tb.ite(arg(1), arg(2), arg(3));
    }
    throw CtError("smtlib: unsupported operator '" + head + "'");
}

int sort_width(const Sexpr& sort) {
    if (sort.is_list && sort.items.size() == 3 && sort.items[0].atom == "_" &&
        sort.items[1].atom == "BitVec")
        return static_cast<int>(std::strtol(sort.items[2].atom.c_str(), nullptr, 10));
    if (!sort.is_list && sort.atom == "Bool") return 1;
    throw CtError("smtlib: unsupported sort");
}

}  // namespace

SmtScript parse_smtlib(const std::string& text) {
    auto toks = tokenize(text);
    std::vector<Sexpr> forms;
    size_t i = 0;
    while (i < toks.size()) forms.push_back(parse_sexpr(toks, i));

    SmtScript script;
    std::set<std::string> decl_names;
    std::vector<const Sexpr*> assert_forms;
    for (const auto& f : forms) {
        if (!f.is_list || f.items.empty()) throw CtError("smtlib: stray token at top level");
        const std::string& head = f.items[0].atom;
        if (head == "set-logic" || head == "set-option" || head == "set-info" ||
            head == "exit")
            continue;
        if (head == "declare-const" && f.items.size() == 3) {
            script.decls.emplace_back(f.items[1].atom, sort_width(f.items[2]));
            decl_names.insert(f.items[1].atom);
            continue;
        }
        if (head == "declare-fun" && f.items.size() == 4 && f.items[2].items.empty()) {
            script.decls.emplace_back(f.items[1].atom, sort_width(f.items[3]));
            decl_names.insert(f.items[1].atom);
            continue;
        }
        if (head == "assert" && f.items.size() == 2) {
            assert_forms.push_back(&f.items[1]);
            continue;
        }
        if (head == "check-sat") {
            script.check_sat = true;
            continue;
        }
        if (head == "get-model") {
            script.get_model = true;
            continue;
        }
        throw CtError("smtlib: unsupported command '" + head + "'");
    }

    int w = 0;
    for (const auto& [name, dw] : script.decls) {
        if (w == 0) w = dw;
        if (dw != w) throw CtError("smtlib: mixed bit-vector widths are not supported");
    }
    if (w == 0) w = 8;  // ground formulas: any width serves
    if (!width_valid(w)) throw CtError("smtlib: unsupported width " + std::to_string(w));
    script.width = w;
    script.tb = std::make_shared<TermBuilder>(w);
    for (const Sexpr* a : assert_forms)
        script.asserts.push_back(eval_smt(*a, *script.tb, {}, decl_names));
    return script;
}

}  // namespace ctprover
