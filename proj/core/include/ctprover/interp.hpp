#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ctprover/ast.hpp"

namespace ctprover {

// Observation events: condition truth values for branches/loops, index values
// for loads/stores. Constant-index accesses observe a compile-time constant
// and emit nothing (they cannot distinguish two executions).
enum class EventKind { Branch, Loop, LoadIdx, StoreIdx };

const char* event_kind_text(EventKind k);

struct Event {
    int label = -1;
    EventKind kind = EventKind::Branch;
    uint64_t value = 0;
    bool operator==(const Event& o) const {
        return label == o.label && kind == o.kind && value == o.value;
    }
};

using Trace = std::vector<Event>;

std::string trace_line(const Event& e);

// Equal, or the first index at which the traces differ (a missing event on
// one side counts as a difference at that index).
struct TraceCmp {
    bool equal = true;
    size_t mismatch = 0;
};
TraceCmp traces_prefix_equal(const Trace& a, const Trace& b);

enum class RunStatus {
    Complete,
    Stuck,           // failed assert, division by zero, raw out-of-bounds
    Blocked,         // false assume: execution cannot continue but is not an error
    FuelExhausted,
};

const char* run_status_text(RunStatus s);

struct RunResult {
    RunStatus status = RunStatus::Complete;
    int stop_label = -1;             // statement at which Stuck/Blocked occurred
    std::map<std::string, uint64_t> returns;
    Trace trace;
    uint64_t steps = 0;
};

struct InputBinding {
    std::map<std::string, uint64_t> scalars;
    std::map<std::string, std::vector<uint64_t>> arrays;
};

constexpr uint64_t kDefaultFuel = 1ull << 20;

// Executes normalized programs. A fresh run zero-initializes all variables,
// binds the entry parameters from the input, and follows the small-step
// semantics; arrays are passed to callees by reference.
class Interpreter {
public:
    Interpreter(const Program& p, int width);

    RunResult run(const InputBinding& in, uint64_t fuel = kDefaultFuel);

    // Invoked before each labeled statement executes; scalar()/array_values()
    // may be used from inside the callback.
    std::function<void(int label)> observer;

    uint64_t scalar(const std::string& name) const;
    const std::vector<uint64_t>& array_values(const std::string& name) const;

private:
    struct Halt {};  // unwinds to run() when execution cannot continue

    uint64_t eval(const Expr& e);
    uint64_t eval_atom(const Atom& a);
    void exec(const Stmt& s);
    void exec_call(const Stmt& s);
    void tick(const Stmt& s);
    [[noreturn]] void halt(RunStatus st, int label);
    int resolve_array(int id) const;

    const Program& prog_;
    WidthConfig width_;

    std::map<std::string, int> scalar_slot_;
    std::map<std::string, int> array_id_;
    std::vector<uint64_t> array_len_;

    // run state
    std::vector<uint64_t> scalars_;
    std::vector<std::vector<uint64_t>> array_store_;
    std::vector<int> array_bind_;    // id -> id whose storage is used (roots map to self)
    uint64_t fuel_ = 0;
    int current_label_ = -1;         // for halts raised inside expression evaluation
    RunResult result_;
};

// Entry parameter names split by annotation, in declaration order.
struct EntrySplit {
    std::vector<Param> public_params;
    std::vector<Param> secret_params;
};
EntrySplit split_entry_params(const Program& p);

}  // namespace ctprover
