#include "ctprover/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "ctprover/errors.hpp"

namespace ctprover {

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    uint64_t value = 0;
    int line = 1, col = 1;
};

const char* kPuncts[] = {
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", ":=", "@inv",
    "(", ")", "{", "}", "[", "]", ",", ";", "+", "-", "*", "/", "%",
    "&", "|", "^", "~", "!", "<", ">",
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= text_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                    text_[pos_] == '$'))
                bump();
            tok_.kind = Tok::Ident;
            tok_.text = std::string(text_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            int base = 10;
            if (c == '0' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == 'x' || text_[pos_ + 1] == 'X')) {
                base = 16;
                bump();
                bump();
            }
            while (pos_ < text_.size() && std::isxdigit(static_cast<unsigned char>(text_[pos_])))
                bump();
            tok_.kind = Tok::Int;
            tok_.text = std::string(text_.substr(start, pos_ - start));
            try {
                tok_.value = std::stoull(base == 16 ? tok_.text.substr(2) : tok_.text, nullptr, base);
            } catch (const std::exception&) {
                throw ParseError(tok_.line, tok_.col, "integer literal out of range: " + tok_.text);
            }
            return;
        }
        for (const char* p : kPuncts) {
            std::string_view sv(p);
            if (text_.substr(pos_).substr(0, sv.size()) == sv) {
                tok_.kind = Tok::Punct;
                tok_.text = std::string(sv);
                for (size_t i = 0; i < sv.size(); i++) bump();
                return;
            }
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') bump();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (text_[pos_] == '\n') {
            line_++;
            col_ = 1;
        } else {
            col_++;
        }
        pos_++;
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

bool is_keyword(const std::string& s) {
    static const char* kw[] = {"def", "var", "array", "skip", "assert", "assume", "if", "then",
                               "else", "fi", "while", "do", "od", "return", "pub", "sec"};
    for (const char* k : kw)
        if (s == k) return true;
    return false;
}

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    Program parse_program() {
        Program p;
        while (lex_.peek().kind != Tok::End) p.procedures.push_back(parse_procedure());
        if (p.procedures.empty()) fail("empty program");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(lex_.peek().line, lex_.peek().col, msg);
    }

    void expect_punct(const std::string& p) {
        const Token& t = lex_.peek();
        if (t.kind != Tok::Punct || t.text != p) fail("expected '" + p + "'");
        lex_.next();
    }

    bool accept_punct(const std::string& p) {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Punct && t.text == p) {
            lex_.next();
            return true;
        }
        return false;
    }

    void expect_kw(const std::string& k) {
        const Token& t = lex_.peek();
        if (t.kind != Tok::Ident || t.text != k) fail("expected '" + k + "'");
        lex_.next();
    }

    bool peek_kw(const std::string& k) {
        const Token& t = lex_.peek();
        return t.kind == Tok::Ident && t.text == k;
    }

    bool accept_kw(const std::string& k) {
        if (peek_kw(k)) {
            lex_.next();
            return true;
        }
        return false;
    }

    std::string expect_ident() {
        const Token& t = lex_.peek();
        if (t.kind != Tok::Ident || is_keyword(t.text)) fail("expected identifier");
        return lex_.next().text;
    }

    uint64_t expect_int() {
        if (lex_.peek().kind != Tok::Int) fail("expected integer literal");
        return lex_.next().value;
    }

    Procedure parse_procedure() {
        expect_kw("def");
        Procedure proc;
        proc.name = expect_ident();
        expect_punct("(");
        if (!accept_punct(")")) {
            do {
                proc.params.push_back(parse_param());
            } while (accept_punct(","));
            expect_punct(")");
        }
        expect_punct("{");
        while (peek_kw("var") || peek_kw("array")) {
            if (accept_kw("var")) {
                proc.locals.push_back(expect_ident());
                expect_punct(";");
            } else {
                expect_kw("array");
                ArrayDecl d;
                d.name = expect_ident();
                expect_punct("[");
                d.length = expect_int();
                expect_punct("]");
                expect_punct(";");
                proc.local_arrays.push_back(d);
            }
        }
        proc.body = parse_stmts_until("return");
        expect_kw("return");
        if (!accept_punct(";")) {
            do {
                proc.returns.push_back(expect_ident());
            } while (accept_punct(","));
            expect_punct(";");
        }
        expect_punct("}");
        return proc;
    }

    Param parse_param() {
        Param p;
        if (accept_kw("pub"))
            p.annot = Annot::Public;
        else if (accept_kw("sec"))
            p.annot = Annot::Secret;
        p.name = expect_ident();
        if (accept_punct("[")) {
            p.is_array = true;
            p.length = expect_int();
            expect_punct("]");
        }
        return p;
    }

    // Parses statements until the given keyword or a block terminator
    // (else/fi/od) is at the front.
    StmtPtr parse_stmts_until(const std::string& end_kw) {
        Stmt::Block blk;
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind == Tok::End) fail("unterminated block, expected '" + end_kw + "'");
            if (t.kind == Tok::Ident &&
                (t.text == end_kw || t.text == "else" || t.text == "fi" || t.text == "od"))
                break;
            blk.stmts.push_back(parse_stmt());
        }
        return Stmt::make(std::move(blk));
    }

    StmtPtr parse_stmt() {
        if (accept_kw("skip")) {
            expect_punct(";");
            return Stmt::make(Stmt::Skip{});
        }
        if (accept_kw("assert")) {
            ExprPtr e = parse_expr();
            expect_punct(";");
            return Stmt::make(Stmt::Assert{e});
        }
        if (accept_kw("assume")) {
            ExprPtr e = parse_expr();
            expect_punct(";");
            return Stmt::make(Stmt::Assume{e});
        }
        if (accept_kw("if")) {
            ExprPtr c = parse_expr();
            expect_kw("then");
            StmtPtr then_body = parse_stmts_until("fi");
            StmtPtr else_body;
            if (accept_kw("else"))
                else_body = parse_stmts_until("fi");
            else
                else_body = Stmt::make(Stmt::Block{});
            expect_kw("fi");
            return Stmt::make(Stmt::If{c, then_body, else_body});
        }
        if (accept_kw("while")) {
            ExprPtr c = parse_expr();
            std::vector<ExprPtr> invs;
            while (accept_punct("@inv")) {
                expect_punct("(");
                invs.push_back(parse_expr());
                expect_punct(")");
            }
            expect_kw("do");
            StmtPtr body = parse_stmts_until("od");
            expect_kw("od");
            return Stmt::make(Stmt::While{c, body, std::move(invs)});
        }
        // store | assign | call
        std::string first = expect_ident();
        if (accept_punct("[")) {
            ExprPtr idx = parse_expr();
            expect_punct("]");
            expect_punct(":=");
            ExprPtr val = parse_expr();
            expect_punct(";");
            // Index/value shapes beyond atoms are reduced by normalize; the
            // parser keeps them as expressions via a synthetic assign when
            // they are not atoms yet.
            return make_store(first, idx, val);
        }
        std::vector<std::string> lhs{first};
        while (accept_punct(",")) lhs.push_back(expect_ident());
        expect_punct(":=");
        // Call if rhs is IDENT '('.
        if (lex_.peek().kind == Tok::Ident && !is_keyword(lex_.peek().text)) {
            Token save = lex_.peek();
            std::string callee = lex_.next().text;
            if (accept_punct("(")) {
                Stmt::Call call;
                call.lhs = std::move(lhs);
                call.callee = callee;
                if (!accept_punct(")")) {
                    do {
                        call.args.push_back(parse_atom());
                    } while (accept_punct(","));
                    expect_punct(")");
                }
                expect_punct(";");
                return Stmt::make(std::move(call));
            }
            // Not a call: re-parse as expression starting from the identifier.
            ExprPtr e = continue_expr_from_ident(save.text);
            expect_punct(";");
            if (lhs.size() != 1) fail("tuple assignment is only valid for calls");
            return Stmt::make(Stmt::Assign{lhs[0], e});
        }
        ExprPtr e = parse_expr();
        expect_punct(";");
        if (lhs.size() != 1) fail("tuple assignment is only valid for calls");
        return Stmt::make(Stmt::Assign{lhs[0], e});
    }

    StmtPtr make_store(const std::string& array, ExprPtr idx, ExprPtr val) {
        // Atom operands go straight into the Store node; compound ones stay
        // as expressions for normalize to lower (fresh names are its job).
        Stmt::Store st;
        st.array = array;
        if (idx->is_var())
            st.index = Atom::make_var(idx->var_name());
        else if (idx->is_lit())
            st.index = Atom::make_lit(idx->lit_value());
        else
            st.index_expr = idx;
        if (val->is_var())
            st.value = Atom::make_var(val->var_name());
        else if (val->is_lit())
            st.value = Atom::make_lit(val->lit_value());
        else
            st.value_expr = val;
        return Stmt::make(std::move(st));
    }

    Atom parse_atom() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Int) return Atom::make_lit(lex_.next().value);
        if (t.kind == Tok::Ident && !is_keyword(t.text)) return Atom::make_var(lex_.next().text);
        fail("expected variable or integer literal");
    }

    ExprPtr continue_expr_from_ident(const std::string& name) {
        ExprPtr base;
        if (accept_punct("[")) {
            ExprPtr idx = parse_expr();
            expect_punct("]");
            base = Expr::array_read(name, idx);
        } else {
            base = Expr::var(name);
        }
        return parse_binary_rest(base, 0);
    }

    struct OpLevel {
        BinOp op;
        const char* text;
        int prec;
    };

    static const std::vector<OpLevel>& op_table() {
        static const std::vector<OpLevel> t = {
            {BinOp::LogOr, "||", 1},  {BinOp::LogAnd, "&&", 2}, {BinOp::BitOr, "|", 3},
            {BinOp::BitXor, "^", 4},  {BinOp::BitAnd, "&", 5},  {BinOp::Eq, "==", 6},
            {BinOp::Ne, "!=", 6},     {BinOp::Lt, "<", 7},      {BinOp::Le, "<=", 7},
            {BinOp::Gt, ">", 7},      {BinOp::Ge, ">=", 7},     {BinOp::Shl, "<<", 8},
            {BinOp::Shr, ">>", 8},    {BinOp::Add, "+", 9},     {BinOp::Sub, "-", 9},
            {BinOp::Mul, "*", 10},    {BinOp::Div, "/", 10},    {BinOp::Mod, "%", 10},
        };
        return t;
    }

    const OpLevel* peek_binop(int min_prec) {
        const Token& t = lex_.peek();
        if (t.kind != Tok::Punct) return nullptr;
        for (const auto& lvl : op_table())
            if (t.text == lvl.text && lvl.prec >= min_prec) return &lvl;
        return nullptr;
    }

    ExprPtr parse_expr() { return parse_binary(1); }

    ExprPtr parse_binary(int min_prec) {
        ExprPtr lhs = parse_unary();
        return parse_binary_rest(lhs, min_prec);
    }

    ExprPtr parse_binary_rest(ExprPtr lhs, int min_prec) {
        for (;;) {
            const OpLevel* lvl = peek_binop(min_prec);
            if (!lvl) return lhs;
            lex_.next();
            ExprPtr rhs = parse_binary(lvl->prec + 1);
            lhs = Expr::bin(lvl->op, lhs, rhs);
        }
    }

    ExprPtr parse_unary() {
        if (accept_punct("~")) return Expr::un(UnOp::BitNot, parse_unary());
        if (accept_punct("!")) return Expr::un(UnOp::LogNot, parse_unary());
        if (accept_punct("-")) return Expr::un(UnOp::Neg, parse_unary());
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Int) return Expr::lit(lex_.next().value);
        if (t.kind == Tok::Ident && !is_keyword(t.text)) {
            std::string name = lex_.next().text;
            if (accept_punct("[")) {
                ExprPtr idx = parse_expr();
                expect_punct("]");
                return Expr::array_read(name, idx);
            }
            return Expr::var(name);
        }
        if (accept_punct("(")) {
            ExprPtr e = parse_expr();
            expect_punct(")");
            return e;
        }
        fail("expected expression");
    }

    Lexer lex_;
};

}  // namespace

Program parse(std::string_view text) {
    Parser p(text);
    return p.parse_program();
}

Program parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace ctprover
