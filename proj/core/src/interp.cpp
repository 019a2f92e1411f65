#include "ctprover/interp.hpp"

#include <sstream>

#include "ctprover/errors.hpp"

namespace ctprover {

const char* event_kind_text(EventKind k) {
    switch (k) {
    case EventKind::Branch: return "branch";
    case EventKind::Loop: return "loop";
    case EventKind::LoadIdx: return "load";
    case EventKind::StoreIdx: return "store";
    }
    return "?";
}

std::string trace_line(const Event& e) {
    std::ostringstream os;
    os << e.label << ":" << event_kind_text(e.kind) << "=" << e.value;
    return os.str();
}

TraceCmp traces_prefix_equal(const Trace& a, const Trace& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; i++)
        if (!(a[i] == b[i])) return {false, i};
    if (a.size() != b.size()) return {false, n};
    return {true, 0};
}

const char* run_status_text(RunStatus s) {
    switch (s) {
    case RunStatus::Complete: return "complete";
    case RunStatus::Stuck: return "stuck";
    case RunStatus::Blocked: return "blocked";
    case RunStatus::FuelExhausted: return "fuel_exhausted";
    }
    return "?";
}

Interpreter::Interpreter(const Program& p, int width) : prog_(p) {
    if (!width_valid(width)) throw InputError("invalid width " + std::to_string(width));
    width_.width = width;
    int next_scalar = 0, next_array = 0;
    for (const auto& proc : p.procedures) {
        auto add_scalar = [&](const std::string& n) {
            if (!scalar_slot_.emplace(n, next_scalar).second)
                throw InputError("duplicate name '" + n + "': program not normalized");
            next_scalar++;
        };
        auto add_array = [&](const std::string& n, uint64_t len) {
            if (!array_id_.emplace(n, next_array).second)
                throw InputError("duplicate name '" + n + "': program not normalized");
            array_len_.push_back(len);
            next_array++;
        };
        for (const auto& pa : proc.params) {
            if (pa.is_array)
                add_array(pa.name, pa.length);
            else
                add_scalar(pa.name);
        }
        for (const auto& l : proc.locals) add_scalar(l);
        for (const auto& a : proc.local_arrays) add_array(a.name, a.length);
    }
}

uint64_t Interpreter::scalar(const std::string& name) const {
    auto it = scalar_slot_.find(name);
    if (it == scalar_slot_.end()) throw InputError("unknown scalar '" + name + "'");
    return scalars_[it->second];
}

const std::vector<uint64_t>& Interpreter::array_values(const std::string& name) const {
    auto it = array_id_.find(name);
    if (it == array_id_.end()) throw InputError("unknown array '" + name + "'");
    return array_store_[resolve_array(it->second)];
}

int Interpreter::resolve_array(int id) const {
    while (array_bind_[id] != id) id = array_bind_[id];
    return id;
}

void Interpreter::halt(RunStatus st, int label) {
    result_.status = st;
    result_.stop_label = label;
    throw Halt{};
}

void Interpreter::tick(const Stmt& s) {
    if (fuel_ == 0) halt(RunStatus::FuelExhausted, s.label);
    fuel_--;
    result_.steps++;
    if (observer) observer(s.label);
}

uint64_t Interpreter::eval_atom(const Atom& a) {
    if (a.lit) return a.value & width_.mask();
    auto it = scalar_slot_.find(a.var);
    if (it == scalar_slot_.end()) throw InputError("unknown scalar '" + a.var + "'");
    return scalars_[it->second];
}

uint64_t Interpreter::eval(const Expr& e) {
    const uint64_t mask = width_.mask();
    if (auto* l = std::get_if<Expr::IntLit>(&e.node)) return l->value & mask;
    if (auto* v = std::get_if<Expr::Var>(&e.node)) {
        auto it = scalar_slot_.find(v->name);
        if (it == scalar_slot_.end()) throw InputError("unknown scalar '" + v->name + "'");
        return scalars_[it->second];
    }
    if (std::get_if<Expr::ArrayRead>(&e.node))
        throw std::logic_error("array read in expression: program not normalized");
    if (auto* b = std::get_if<Expr::Bin>(&e.node)) {
        const uint64_t uw = static_cast<uint64_t>(width_.width);
        uint64_t l = eval(*b->lhs), r = eval(*b->rhs);
        switch (b->op) {
        case BinOp::Add: return (l + r) & mask;
        case BinOp::Sub: return (l - r) & mask;
        case BinOp::Mul: return (l * r) & mask;
        case BinOp::Div:
            if (r == 0) halt(RunStatus::Stuck, current_label_);
            return (l / r) & mask;
        case BinOp::Mod:
            if (r == 0) halt(RunStatus::Stuck, current_label_);
            return (l % r) & mask;
        case BinOp::BitAnd: return l & r;
        case BinOp::BitOr: return l | r;
        case BinOp::BitXor: return l ^ r;
        case BinOp::Shl: return r >= uw ? 0 : (l << r) & mask;
        case BinOp::Shr: return r >= uw ? 0 : (l >> r) & mask;
        case BinOp::Eq: return l == r;
        case BinOp::Ne: return l != r;
        case BinOp::Lt: return l < r;
        case BinOp::Le: return l <= r;
        case BinOp::Gt: return l > r;
        case BinOp::Ge: return l >= r;
        case BinOp::LogAnd: return (l != 0 && r != 0) ? 1 : 0;
        case BinOp::LogOr: return (l != 0 || r != 0) ? 1 : 0;
        }
    }
    const auto& u = std::get<Expr::Un>(e.node);
    uint64_t v = eval(*u.arg);
    switch (u.op) {
    case UnOp::BitNot: return ~v & mask;
    case UnOp::LogNot: return v == 0 ? 1 : 0;
    case UnOp::Neg: return (0 - v) & mask;
    }
    return 0;
}

void Interpreter::exec(const Stmt& s) {
    if (const auto* blk = std::get_if<Stmt::Block>(&s.node)) {
        for (const auto& c : blk->stmts) exec(*c);
        return;
    }
    current_label_ = s.label;
    tick(s);
    if (s.is<Stmt::Skip>()) {
        return;
    }
    if (s.is<Stmt::Assign>()) {
        const auto& a = s.as<Stmt::Assign>();
        uint64_t v = eval(*a.rhs);
        scalars_[scalar_slot_.at(a.lhs)] = v;
        return;
    }
    if (s.is<Stmt::Load>()) {
        const auto& l = s.as<Stmt::Load>();
        uint64_t idx = eval_atom(l.index);
        int id = resolve_array(array_id_.at(l.array));
        if (idx >= array_store_[id].size()) halt(RunStatus::Stuck, s.label);
        if (!l.index.lit)
            result_.trace.push_back({s.label, EventKind::LoadIdx, idx});
        scalars_[scalar_slot_.at(l.lhs)] = array_store_[id][idx];
        return;
    }
    if (s.is<Stmt::Store>()) {
        const auto& st = s.as<Stmt::Store>();
        uint64_t idx = eval_atom(st.index);
        uint64_t val = eval_atom(st.value);
        int id = resolve_array(array_id_.at(st.array));
        if (idx >= array_store_[id].size()) halt(RunStatus::Stuck, s.label);
        if (!st.index.lit)
            result_.trace.push_back({s.label, EventKind::StoreIdx, idx});
        array_store_[id][idx] = val;
        return;
    }
    if (s.is<Stmt::Assert>()) {
        if (eval(*s.as<Stmt::Assert>().cond) == 0) halt(RunStatus::Stuck, s.label);
        return;
    }
    if (s.is<Stmt::Assume>()) {
        if (eval(*s.as<Stmt::Assume>().cond) == 0) halt(RunStatus::Blocked, s.label);
        return;
    }
    if (s.is<Stmt::If>()) {
        const auto& i = s.as<Stmt::If>();
        uint64_t v = eval(*i.cond);
        result_.trace.push_back({s.label, EventKind::Branch, v != 0 ? 1ull : 0ull});
        exec(v != 0 ? *i.then_body : *i.else_body);
        return;
    }
    if (s.is<Stmt::While>()) {
        const auto& w = s.as<Stmt::While>();
        for (;;) {
            uint64_t v = eval(*w.cond);
            result_.trace.push_back({s.label, EventKind::Loop, v != 0 ? 1ull : 0ull});
            if (v == 0) break;
            exec(*w.body);
            // The loop head is a fresh configuration each iteration.
            current_label_ = s.label;
            tick(s);
        }
        return;
    }
    exec_call(s);
}

void Interpreter::exec_call(const Stmt& s) {
    const auto& c = s.as<Stmt::Call>();
    const Procedure* callee = prog_.find_proc(c.callee);
    if (!callee) throw InputError("unknown procedure '" + c.callee + "'");
    // Evaluate actuals before binding (names are globally unique, so there is
    // no frame to save).
    std::vector<uint64_t> scalar_vals;
    std::vector<int> array_roots;
    for (size_t i = 0; i < c.args.size(); i++) {
        if (callee->params[i].is_array)
            array_roots.push_back(resolve_array(array_id_.at(c.args[i].var)));
        else
            scalar_vals.push_back(eval_atom(c.args[i]));
    }
    size_t si = 0, ai = 0;
    for (const auto& p : callee->params) {
        if (p.is_array)
            array_bind_[array_id_.at(p.name)] = array_roots[ai++];
        else
            scalars_[scalar_slot_.at(p.name)] = scalar_vals[si++];
    }
    exec(*callee->body);
    for (size_t i = 0; i < c.lhs.size(); i++)
        scalars_[scalar_slot_.at(c.lhs[i])] = scalars_[scalar_slot_.at(callee->returns[i])];
}

RunResult Interpreter::run(const InputBinding& in, uint64_t fuel) {
    result_ = RunResult{};
    fuel_ = fuel;
    scalars_.assign(scalar_slot_.size(), 0);
    array_store_.clear();
    array_bind_.clear();
    for (size_t i = 0; i < array_len_.size(); i++) {
        array_store_.emplace_back(array_len_[i], 0);
        array_bind_.push_back(static_cast<int>(i));
    }

    const Procedure& entry = prog_.entry_proc();
    for (const auto& p : entry.params) {
        if (p.is_array) {
            auto it = in.arrays.find(p.name);
            if (it == in.arrays.end()) throw InputError("missing input array '" + p.name + "'");
            if (it->second.size() != p.length)
                throw InputError("input array '" + p.name + "' has length " +
                                 std::to_string(it->second.size()) + ", expected " +
                                 std::to_string(p.length));
            auto& dst = array_store_[array_id_.at(p.name)];
            for (size_t i = 0; i < it->second.size(); i++) dst[i] = it->second[i] & width_.mask();
        } else {
            auto it = in.scalars.find(p.name);
            if (it == in.scalars.end()) throw InputError("missing input '" + p.name + "'");
            scalars_[scalar_slot_.at(p.name)] = it->second & width_.mask();
        }
    }

    try {
        exec(*entry.body);
        for (const auto& r : entry.returns) result_.returns[r] = scalars_[scalar_slot_.at(r)];
    } catch (const Halt&) {
        // status already recorded
    }
    return result_;
}

EntrySplit split_entry_params(const Program& p) {
    EntrySplit out;
    for (const auto& pa : p.entry_proc().params) {
        if (pa.annot == Annot::Secret)
            out.secret_params.push_back(pa);
        else
            out.public_params.push_back(pa);
    }
    return out;
}

}  // namespace ctprover
