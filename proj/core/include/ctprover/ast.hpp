#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// AST for the While language. Programs are width-agnostic: the machine word
// width is a run/verify parameter, not part of the syntax.

namespace ctprover {

enum class BinOp {
    Add, Sub, Mul, Div, Mod,
    BitAnd, BitOr, BitXor, Shl, Shr,
    Eq, Ne, Lt, Le, Gt, Ge,
    LogAnd, LogOr,
};

enum class UnOp { BitNot, LogNot, Neg };

const char* binop_text(BinOp op);
const char* unop_text(UnOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    struct IntLit { uint64_t value; };
    struct Var { std::string name; };
    // Array read a[e]; only permitted nested in expressions before
    // normalization. Normalized statements carry loads explicitly.
    struct ArrayRead { std::string array; ExprPtr index; };
    struct Bin { BinOp op; ExprPtr lhs, rhs; };
    struct Un { UnOp op; ExprPtr arg; };

    std::variant<IntLit, Var, ArrayRead, Bin, Un> node;

    static ExprPtr lit(uint64_t v);
    static ExprPtr var(std::string name);
    static ExprPtr array_read(std::string array, ExprPtr index);
    static ExprPtr bin(BinOp op, ExprPtr l, ExprPtr r);
    static ExprPtr un(UnOp op, ExprPtr a);

    bool is_var() const { return std::holds_alternative<Var>(node); }
    bool is_lit() const { return std::holds_alternative<IntLit>(node); }
    const std::string& var_name() const { return std::get<Var>(node).name; }
    uint64_t lit_value() const { return std::get<IntLit>(node).value; }
};

bool expr_equal(const Expr& a, const Expr& b);
// Scalar variables appearing in e; array names are collected separately.
void expr_vars(const Expr& e, std::vector<std::string>& out);
void expr_arrays(const Expr& e, std::vector<std::string>& out);
bool expr_has_array_read(const Expr& e);

// A normalized operand: integer literal or scalar variable.
struct Atom {
    bool lit = false;
    uint64_t value = 0;
    std::string var;

    static Atom make_lit(uint64_t v) { return Atom{true, v, {}}; }
    static Atom make_var(std::string n) { return Atom{false, 0, std::move(n)}; }
    bool operator==(const Atom& o) const {
        return lit == o.lit && (lit ? value == o.value : var == o.var);
    }
};

ExprPtr atom_expr(const Atom& a);
std::string atom_text(const Atom& a);

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
    struct Skip {};
    struct Assign { std::string lhs; ExprPtr rhs; };
    struct Load { std::string lhs; std::string array; Atom index; };   // lhs := array[index]
    // array[index] := value. Surface syntax allows compound operands; the
    // parser stores those in index_expr/value_expr and normalize lowers them
    // to atoms through fresh temporaries. Normalized stores have both expr
    // fields null.
    struct Store {
        std::string array;
        Atom index;
        Atom value;
        ExprPtr index_expr;
        ExprPtr value_expr;
    };
    struct Assert { ExprPtr cond; };
    struct Assume { ExprPtr cond; };
    struct If { ExprPtr cond; StmtPtr then_body; StmtPtr else_body; };
    struct While { ExprPtr cond; StmtPtr body; std::vector<ExprPtr> invariants; };
    struct Call { std::vector<std::string> lhs; std::string callee; std::vector<Atom> args; };
    // Structural sequencing; carries no label of its own.
    struct Block { std::vector<StmtPtr> stmts; };

    int label = -1;
    std::variant<Skip, Assign, Load, Store, Assert, Assume, If, While, Call, Block> node;

    template <class T> bool is() const { return std::holds_alternative<T>(node); }
    template <class T> const T& as() const { return std::get<T>(node); }
    template <class T> T& as() { return std::get<T>(node); }

    static StmtPtr make(std::variant<Skip, Assign, Load, Store, Assert, Assume, If, While, Call, Block> n);
};

// Condition variable of a normalized If/While; throws if not normalized.
const std::string& cond_var(const Expr& cond);

struct ArrayDecl {
    std::string name;
    uint64_t length = 0;
};

enum class Annot { None, Public, Secret };

struct Param {
    std::string name;
    Annot annot = Annot::None;     // required on entry params, absent elsewhere
    bool is_array = false;
    uint64_t length = 0;           // static length when is_array
};

struct Procedure {
    std::string name;
    std::vector<Param> params;
    std::vector<std::string> returns;      // scalar identifiers
    std::vector<std::string> locals;       // scalar declarations
    std::vector<ArrayDecl> local_arrays;
    StmtPtr body;
};

struct Program {
    std::vector<Procedure> procedures;
    std::string entry = "main";

    const Procedure* find_proc(const std::string& name) const;
    Procedure* find_proc(const std::string& name);
    const Procedure& entry_proc() const;
};

// Potential side-channel sources, one per Def-observable operand.
enum class SourceKind { BranchCond, LoopCond, LoadIndex, StoreIndex };

const char* source_kind_text(SourceKind k);

enum class SourceStatus {
    Unresolved, ResolvedStep1, ResolvedStep2, ResolvedStep3, ConfirmedLeak, Unknown,
};

const char* source_status_text(SourceStatus s);

struct Source {
    int label = -1;
    std::string var;
    SourceKind kind = SourceKind::BranchCond;
    SourceStatus status = SourceStatus::Unresolved;

    bool operator==(const Source& o) const {
        return label == o.label && var == o.var && kind == o.kind;
    }
    bool operator<(const Source& o) const {
        if (label != o.label) return label < o.label;
        if (var != o.var) return var < o.var;
        return static_cast<int>(kind) < static_cast<int>(o.kind);
    }
};

// Structural equality; labels are compared only when compare_labels is set.
bool stmt_equal(const Stmt& a, const Stmt& b, bool compare_labels = false);
bool program_equal(const Program& a, const Program& b, bool compare_labels = false);

// Walk every labeled statement (skips Block nodes) in label order.
void for_each_stmt(const Stmt& s, const std::function<void(const Stmt&)>& fn);
void for_each_stmt(const Program& p, const std::function<void(const Stmt&)>& fn);

int max_label(const Program& p);
// Number of labeled statements.
int stmt_count(const Program& p);

const Stmt* find_stmt(const Program& p, int label);

struct WidthConfig {
    int width = 8;    // one of 4, 8, 16, 32, 64
    uint64_t mask() const { return width == 64 ? ~0ull : ((1ull << width) - 1); }
};

bool width_valid(int w);

}  // namespace ctprover
