#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sicov/diff.hpp"
#include "sicov/error.hpp"

namespace sicov {

// ---------------------------------------------------------------------------
// Signature model
// ---------------------------------------------------------------------------

enum class Builtin {
    Void,
    Bool,
    Char,
    SChar,
    UChar,
    WChar,
    Short,
    UShort,
    Int,
    UInt,
    Long,
    ULong,
    LongLong,
    ULongLong,
    Float,
    Double,
    LongDouble,
};

/// A parameter or return type at scanner fidelity: builtins, qualified named
/// types, pointers, references, and const qualification.
struct TypeExpr {
    enum class Kind { Builtin, Named, Pointer, LvalueRef, RvalueRef, Const };

    Kind kind = Kind::Builtin;
    Builtin builtin = Builtin::Int;
    std::vector<std::string> name; // Kind::Named: qualified components
    std::vector<TypeExpr> inner;   // exactly one element for Pointer/Refs/Const

    friend bool operator==(const TypeExpr&, const TypeExpr&) = default;
};

inline TypeExpr make_builtin(Builtin b) {
    TypeExpr t;
    t.kind = TypeExpr::Kind::Builtin;
    t.builtin = b;
    return t;
}

inline TypeExpr make_named(std::vector<std::string> components) {
    TypeExpr t;
    t.kind = TypeExpr::Kind::Named;
    t.name = std::move(components);
    return t;
}

inline TypeExpr wrap_type(TypeExpr::Kind kind, TypeExpr inner) {
    TypeExpr t;
    t.kind = kind;
    t.inner.push_back(std::move(inner));
    return t;
}

inline TypeExpr make_pointer(TypeExpr inner) { return wrap_type(TypeExpr::Kind::Pointer, std::move(inner)); }
inline TypeExpr make_lvalue_ref(TypeExpr inner) { return wrap_type(TypeExpr::Kind::LvalueRef, std::move(inner)); }
inline TypeExpr make_rvalue_ref(TypeExpr inner) { return wrap_type(TypeExpr::Kind::RvalueRef, std::move(inner)); }

inline TypeExpr make_const(TypeExpr inner) {
    if (inner.kind == TypeExpr::Kind::Const)
        return inner; // const applies at most once per node
    return wrap_type(TypeExpr::Kind::Const, std::move(inner));
}

struct FunctionSignature {
    std::vector<std::string> qualified_name; // scope components + terminal name
    std::vector<TypeExpr> parameters;
    bool is_const_member = false;
    bool is_extern_c = false;

    const std::string& terminal_name() const { return qualified_name.back(); }

    friend bool operator==(const FunctionSignature&, const FunctionSignature&) = default;
};

/// A function definition found in a source file. `span` runs from the line
/// holding the declarator's terminal name through the line of the closing
/// body brace. When the declarator falls outside the supported subset,
/// `unsupported` names the construct and the signature carries only the
/// qualified name.
struct FunctionSpan {
    FunctionSignature signature;
    LineRange span;
    std::string file;
    bool is_template = false;
    std::string unsupported; // empty when the full signature was resolved

    bool has_full_signature() const { return unsupported.empty(); }
};

// ---------------------------------------------------------------------------
// Lexing
// ---------------------------------------------------------------------------

enum class TokKind { Identifier, Number, String, CharLit, Punct };

struct Token {
    TokKind kind;
    std::string text;
    int line;
};

/// Token stream with comments, string/char literals, and preprocessor
/// directives removed from structural consideration. Literal tokens survive
/// as placeholders carrying their content; directive lines are recorded.
struct TokenStream {
    std::vector<Token> tokens;
    std::vector<int> directive_lines;
};

namespace detail {

inline bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Multi-character punctuators, longest first.
inline const std::array<std::string_view, 24>& multichar_puncts() {
    static const std::array<std::string_view, 24> puncts = {
        "<<=", ">>=", "<=>", "->*", "...", "::", "->", "++", "--", "<<", ">>", "<=",
        ">=",  "==",  "!=",  "&&",  "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    };
    return puncts;
}

} // namespace detail

/// Lexes source text into a TokenStream, preserving the line number of every
/// surviving token exactly.
inline TokenStream strip_noncode(std::string_view text) {
    TokenStream out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    int line = 1;

    auto advance_over = [&](char c) {
        if (c == '\n')
            ++line;
        ++i;
    };

    auto skip_plain_string = [&](char quote) {
        // i points at the opening quote; strings do not span lines, but be
        // lenient and stop at an unescaped newline.
        std::string content;
        ++i;
        while (i < n && text[i] != quote && text[i] != '\n') {
            if (text[i] == '\\' && i + 1 < n) {
                content.push_back(text[i]);
                content.push_back(text[i + 1]);
                i += 2;
                continue;
            }
            content.push_back(text[i]);
            ++i;
        }
        if (i < n && text[i] == quote)
            ++i;
        return content;
    };

    while (i < n) {
        char c = text[i];
        if (c == '\n' || c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            advance_over(c);
            continue;
        }
        if (c == '\\' && i + 1 < n && (text[i + 1] == '\n' || (text[i + 1] == '\r' && i + 2 < n && text[i + 2] == '\n'))) {
            // line splice
            while (i < n && text[i] != '\n')
                ++i;
            if (i < n)
                advance_over('\n');
            continue;
        }
        if (c == '/' && i + 1 < n && text[i + 1] == '/') {
            while (i < n && text[i] != '\n')
                ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && text[i + 1] == '*') {
            const int start_line = line;
            i += 2;
            bool closed = false;
            while (i < n) {
                if (text[i] == '*' && i + 1 < n && text[i + 1] == '/') {
                    i += 2;
                    closed = true;
                    break;
                }
                advance_over(text[i]);
            }
            if (!closed)
                throw scan_error("unterminated block comment", start_line);
            continue;
        }
        if (c == '#') {
            // Preprocessor directive: record and drop through end of line,
            // honoring backslash continuations.
            out.directive_lines.push_back(line);
            while (i < n) {
                if (text[i] == '\\' && i + 1 < n && text[i + 1] == '\n') {
                    i += 2;
                    ++line;
                    continue;
                }
                if (text[i] == '\n')
                    break;
                ++i;
            }
            continue;
        }
        if (detail::is_ident_start(c)) {
            std::size_t start = i;
            while (i < n && detail::is_ident_char(text[i]))
                ++i;
            std::string word(text.substr(start, i - start));
            // String prefixes: L"", u8"", u"", U"", and raw variants LR"" etc.
            bool raw_next = i < n && text[i] == '"' &&
                            (word == "R" || word == "LR" || word == "uR" || word == "UR" || word == "u8R");
            bool str_next = i < n && text[i] == '"' &&
                            (word == "L" || word == "u" || word == "U" || word == "u8");
            bool chr_next = i < n && text[i] == '\'' &&
                            (word == "L" || word == "u" || word == "U" || word == "u8");
            if (raw_next) {
                const int start_line = line;
                ++i; // consume quote
                std::string delim;
                while (i < n && text[i] != '(')
                    delim.push_back(text[i++]);
                if (i < n)
                    ++i; // consume '('
                std::string closer = ")" + delim + "\"";
                std::size_t end = text.find(closer, i);
                if (end == std::string_view::npos)
                    throw scan_error("unterminated raw string literal", start_line);
                std::string content(text.substr(i, end - i));
                for (std::size_t k = i; k < end; ++k)
                    if (text[k] == '\n')
                        ++line;
                i = end + closer.size();
                out.tokens.push_back({TokKind::String, std::move(content), start_line});
                continue;
            }
            if (str_next) {
                const int start_line = line;
                out.tokens.push_back({TokKind::String, skip_plain_string('"'), start_line});
                continue;
            }
            if (chr_next) {
                const int start_line = line;
                out.tokens.push_back({TokKind::CharLit, skip_plain_string('\''), start_line});
                continue;
            }
            out.tokens.push_back({TokKind::Identifier, std::move(word), line});
            continue;
        }
        if (c == '"') {
            const int start_line = line;
            out.tokens.push_back({TokKind::String, skip_plain_string('"'), start_line});
            continue;
        }
        if (c == '\'') {
            const int start_line = line;
            out.tokens.push_back({TokKind::CharLit, skip_plain_string('\''), start_line});
            continue;
        }
        if (detail::is_digit(c) || (c == '.' && i + 1 < n && detail::is_digit(text[i + 1]))) {
            // pp-number: digits, idents, dots, exponent signs
            std::size_t start = i;
            ++i;
            while (i < n) {
                char d = text[i];
                if (detail::is_ident_char(d) || d == '.') {
                    ++i;
                    continue;
                }
                if ((d == '+' || d == '-') && (text[i - 1] == 'e' || text[i - 1] == 'E' ||
                                               text[i - 1] == 'p' || text[i - 1] == 'P')) {
                    ++i;
                    continue;
                }
                break;
            }
            out.tokens.push_back({TokKind::Number, std::string(text.substr(start, i - start)), line});
            continue;
        }
        // Punctuator: longest match from the multi-char table, else one char.
        bool matched = false;
        for (std::string_view p : detail::multichar_puncts()) {
            if (text.substr(i, p.size()) == p) {
                out.tokens.push_back({TokKind::Punct, std::string(p), line});
                i += p.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            out.tokens.push_back({TokKind::Punct, std::string(1, c), line});
            ++i;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scanning
// ---------------------------------------------------------------------------

struct ScanOptions {
    int max_brace_depth = 256;
};

namespace detail {

struct Scope {
    enum class Kind { Namespace, Class, ExternC };
    Kind kind;
    std::string name;
    bool is_template = false;
};

inline bool is_builtin_keyword(const std::string& w) {
    return w == "void" || w == "bool" || w == "char" || w == "wchar_t" || w == "short" ||
           w == "int" || w == "long" || w == "signed" || w == "unsigned" || w == "float" ||
           w == "double";
}

inline bool is_decl_specifier(const std::string& w) {
    return w == "inline" || w == "static" || w == "virtual" || w == "explicit" ||
           w == "constexpr" || w == "consteval" || w == "constinit" || w == "friend" ||
           w == "extern" || w == "mutable" || w == "thread_local" || w == "register" ||
           w == "typename";
}

inline bool is_elaborated_keyword(const std::string& w) {
    return w == "struct" || w == "class" || w == "union" || w == "enum";
}

// Maps a run of builtin type keywords (order-insensitive) to a Builtin,
// e.g. {"unsigned","long","long"} -> ULongLong. Returns nullopt on an
// invalid combination.
inline std::optional<Builtin> classify_builtin(const std::vector<std::string>& words) {
    int longs = 0;
    bool has_signed = false, has_unsigned = false, has_short = false;
    std::string base;
    for (const auto& w : words) {
        if (w == "long")
            ++longs;
        else if (w == "short")
            has_short = true;
        else if (w == "signed")
            has_signed = true;
        else if (w == "unsigned")
            has_unsigned = true;
        else if (base.empty())
            base = w;
        else
            return std::nullopt;
    }
    if (has_signed && has_unsigned)
        return std::nullopt;
    if (base == "void" || base == "bool" || base == "wchar_t" || base == "float") {
        if (longs || has_short || has_signed || has_unsigned)
            return std::nullopt;
        if (base == "void")
            return Builtin::Void;
        if (base == "bool")
            return Builtin::Bool;
        if (base == "wchar_t")
            return Builtin::WChar;
        return Builtin::Float;
    }
    if (base == "double") {
        if (has_short || has_signed || has_unsigned || longs > 1)
            return std::nullopt;
        return longs == 1 ? Builtin::LongDouble : Builtin::Double;
    }
    if (base == "char") {
        if (longs || has_short)
            return std::nullopt;
        if (has_unsigned)
            return Builtin::UChar;
        if (has_signed)
            return Builtin::SChar;
        return Builtin::Char;
    }
    if (base == "int" || base.empty()) {
        if (base.empty() && !longs && !has_short && !has_signed && !has_unsigned)
            return std::nullopt;
        if (has_short) {
            if (longs)
                return std::nullopt;
            return has_unsigned ? Builtin::UShort : Builtin::Short;
        }
        switch (longs) {
        case 0: return has_unsigned ? Builtin::UInt : Builtin::Int;
        case 1: return has_unsigned ? Builtin::ULong : Builtin::Long;
        case 2: return has_unsigned ? Builtin::ULongLong : Builtin::LongLong;
        default: return std::nullopt;
        }
    }
    return std::nullopt;
}

class Scanner {
public:
    Scanner(const TokenStream& stream, std::string path, ScanOptions options)
        : toks_(stream.tokens), path_(std::move(path)), options_(options) {}

    std::vector<FunctionSpan> run() {
        parse_scope_body(/*top_level=*/true);
        return std::move(results_);
    }

private:
    const std::vector<Token>& toks_;
    std::string path_;
    ScanOptions options_;
    std::vector<Scope> scopes_;
    std::vector<FunctionSpan> results_;
    std::size_t pos_ = 0;
    int brace_depth_ = 0;
    std::vector<int> open_brace_lines_;

    // -- token cursor helpers ------------------------------------------------

    bool eof() const { return pos_ >= toks_.size(); }
    const Token& cur() const { return toks_[pos_]; }
    bool at_punct(std::string_view p) const { return !eof() && cur().kind == TokKind::Punct && cur().text == p; }
    bool at_ident(std::string_view w) const {
        return !eof() && cur().kind == TokKind::Identifier && cur().text == w;
    }
    void advance() { ++pos_; }

    int last_line() const { return toks_.empty() ? 1 : toks_.back().line; }

    void open_brace() {
        if (++brace_depth_ > options_.max_brace_depth)
            throw scan_error("brace nesting exceeds limit of " +
                                 std::to_string(options_.max_brace_depth),
                             cur().line);
        open_brace_lines_.push_back(cur().line);
        advance();
    }

    void close_brace() {
        --brace_depth_;
        open_brace_lines_.pop_back();
        advance();
    }

    [[noreturn]] void unbalanced() const {
        throw scan_error("unbalanced braces at end of file",
                         open_brace_lines_.empty() ? last_line() : open_brace_lines_.back());
    }

    // Skips one balanced (...) / [...] / {...} group; cursor on the opener.
    void skip_balanced(std::string_view open, std::string_view close) {
        int start_line = cur().line;
        bool is_brace = open == "{";
        if (is_brace)
            open_brace();
        else
            advance();
        int depth = 1;
        while (!eof()) {
            if (at_punct(open)) {
                ++depth;
                if (is_brace)
                    open_brace();
                else
                    advance();
                continue;
            }
            if (at_punct(close)) {
                --depth;
                if (is_brace)
                    close_brace();
                else
                    advance();
                if (depth == 0)
                    return;
                continue;
            }
            if (!is_brace && at_punct("{")) {
                skip_balanced("{", "}"); // brace group nested in parens (lambda arg etc.)
                continue;
            }
            advance();
        }
        if (is_brace)
            unbalanced();
        throw scan_error("unterminated '" + std::string(open) + "' group", start_line);
    }

    // Skips a template argument/parameter list; cursor on '<'. ">>" closes two.
    void skip_angles() {
        int depth = 0;
        int start_line = cur().line;
        while (!eof()) {
            if (at_punct("<")) {
                ++depth;
                advance();
                continue;
            }
            if (at_punct(">")) {
                if (--depth == 0) {
                    advance();
                    return;
                }
                advance();
                continue;
            }
            if (at_punct(">>")) {
                depth -= 2;
                advance();
                if (depth <= 0)
                    return;
                continue;
            }
            if (at_punct("(")) {
                skip_balanced("(", ")");
                continue;
            }
            if (at_punct(";") || at_punct("{")) // salvaged: not a template list after all
                return;
            advance();
        }
        throw scan_error("unterminated template argument list", start_line);
    }

    // Skips to the ';' ending the current declaration, balancing groups.
    void skip_to_semicolon() {
        while (!eof()) {
            if (at_punct(";")) {
                advance();
                return;
            }
            if (at_punct("{")) {
                skip_balanced("{", "}");
                continue;
            }
            if (at_punct("(")) {
                skip_balanced("(", ")");
                continue;
            }
            if (at_punct("}")) // enclosing scope closes; let caller handle it
                return;
            advance();
        }
    }

    // -- scope parsing --------------------------------------------------------

    void parse_scope_body(bool top_level) {
        bool pending_template = false;
        bool pending_extern_c = false;
        while (!eof()) {
            if (at_punct("}")) {
                if (top_level)
                    throw scan_error("unmatched '}'", cur().line);
                return;
            }
            if (at_punct(";")) {
                advance();
                pending_template = pending_extern_c = false;
                continue;
            }
            if (at_ident("template")) {
                advance();
                if (at_punct("<"))
                    skip_angles();
                pending_template = true;
                continue;
            }
            if (at_ident("namespace")) {
                parse_namespace();
                pending_template = false;
                continue;
            }
            if (at_ident("extern")) {
                std::size_t save = pos_;
                advance();
                if (!eof() && cur().kind == TokKind::String && cur().text == "C") {
                    advance();
                    if (at_punct("{")) {
                        scopes_.push_back({Scope::Kind::ExternC, "", false});
                        open_brace();
                        parse_scope_body(false);
                        if (eof())
                            unbalanced();
                        close_brace();
                        scopes_.pop_back();
                        continue;
                    }
                    pending_extern_c = true;
                    continue;
                }
                pos_ = save; // plain extern: treat as an ordinary specifier
                parse_declaration(pending_template, pending_extern_c);
                pending_template = pending_extern_c = false;
                continue;
            }
            if (at_ident("struct") || at_ident("class") || at_ident("union")) {
                parse_class(pending_template);
                pending_template = false;
                continue;
            }
            if (at_ident("enum")) {
                skip_to_semicolon();
                continue;
            }
            if (at_ident("using") || at_ident("typedef") || at_ident("static_assert")) {
                skip_to_semicolon();
                continue;
            }
            if (at_ident("public") || at_ident("private") || at_ident("protected")) {
                advance();
                if (at_punct(":"))
                    advance();
                continue;
            }
            if (at_punct("{")) {
                // Stray brace block at scope level; fold its contents away.
                skip_balanced("{", "}");
                continue;
            }
            parse_declaration(pending_template, pending_extern_c);
            pending_template = pending_extern_c = false;
        }
        if (!top_level)
            unbalanced();
    }

    void parse_namespace() {
        advance(); // 'namespace'
        std::vector<std::string> components;
        while (!eof() && cur().kind == TokKind::Identifier) {
            components.push_back(cur().text);
            advance();
            if (at_punct("::"))
                advance();
            else
                break;
        }
        if (at_punct("=")) { // namespace alias
            skip_to_semicolon();
            return;
        }
        if (!at_punct("{")) {
            skip_to_semicolon();
            return;
        }
        if (components.empty())
            components.push_back("(anonymous)");
        for (const auto& c : components)
            scopes_.push_back({Scope::Kind::Namespace, c, false});
        open_brace();
        parse_scope_body(false);
        if (eof())
            unbalanced();
        close_brace();
        for (std::size_t k = 0; k < components.size(); ++k)
            scopes_.pop_back();
    }

    void parse_class(bool is_template) {
        advance(); // 'struct' / 'class' / 'union'
        std::string name;
        // Class head: the name is the last identifier before '{', ':' (base
        // clause), or ';'. "final" and attribute groups are skipped.
        while (!eof()) {
            if (cur().kind == TokKind::Identifier) {
                if (cur().text != "final" && cur().text != "alignas")
                    name = cur().text;
                advance();
                if (at_punct("<"))
                    skip_angles(); // template-id in specializations
                continue;
            }
            if (at_punct("[")) {
                skip_balanced("[", "]");
                continue;
            }
            if (at_punct("(")) {
                skip_balanced("(", ")");
                continue;
            }
            break;
        }
        if (at_punct(":")) { // base clause: skip to '{'
            while (!eof() && !at_punct("{") && !at_punct(";"))
                if (at_punct("<"))
                    skip_angles();
                else
                    advance();
        }
        if (!at_punct("{")) { // forward declaration or variable of class type
            skip_to_semicolon();
            return;
        }
        bool enclosing_template = is_template;
        for (const auto& s : scopes_)
            enclosing_template = enclosing_template || s.is_template;
        scopes_.push_back({Scope::Kind::Class, name.empty() ? "(anonymous)" : name,
                           enclosing_template});
        open_brace();
        parse_scope_body(false);
        if (eof())
            unbalanced();
        close_brace();
        scopes_.pop_back();
        skip_to_semicolon(); // trailing declarators / ';'
    }

    // -- declaration parsing ---------------------------------------------------

    struct DeclName {
        std::vector<std::string> components; // qualifying components + terminal
        int name_line = 0;
        bool is_operator = false;
        bool is_dtor = false;
    };

    // Glues an operator-function-id starting at 'operator' into one name.
    // Cursor is on 'operator'; leaves it on the token after the id.
    std::string glue_operator_name() {
        int line = cur().line;
        (void)line;
        advance();
        std::string name = "operator";
        if (at_punct("(")) {
            // operator()
            advance();
            if (at_punct(")")) {
                advance();
                return name + "()";
            }
            return name + "("; // malformed; let caller fail gracefully
        }
        if (at_punct("[")) {
            advance();
            if (at_punct("]")) {
                advance();
                return name + "[]";
            }
            return name + "[";
        }
        if (!eof() && (at_ident("new") || at_ident("delete"))) {
            name += " " + cur().text;
            advance();
            if (at_punct("[")) {
                advance();
                if (at_punct("]")) {
                    advance();
                    name += "[]";
                }
            }
            return name;
        }
        if (!eof() && cur().kind == TokKind::Punct && cur().text != "(") {
            name += cur().text;
            advance();
            return name;
        }
        // Conversion operator: consume type tokens up to '('.
        while (!eof() && !at_punct("(")) {
            name += " " + cur().text;
            advance();
        }
        return name;
    }

    // Parses [~] id [<...>] (:: [~] id [<...>])* ending the cursor after the
    // last component. Returns nullopt when the cursor is not on a name.
    std::optional<DeclName> parse_declarator_id(bool& saw_template_args) {
        DeclName out;
        if (at_punct("::"))
            advance();
        while (!eof()) {
            if (at_punct("~")) {
                advance();
                if (eof() || cur().kind != TokKind::Identifier)
                    return std::nullopt;
                out.components.push_back("~" + cur().text);
                out.name_line = cur().line;
                out.is_dtor = true;
                advance();
                return out;
            }
            if (at_ident("operator")) {
                out.name_line = cur().line;
                out.components.push_back(glue_operator_name());
                out.is_operator = true;
                return out;
            }
            if (cur().kind != TokKind::Identifier)
                return out.components.empty() ? std::nullopt : std::make_optional(out);
            out.components.push_back(cur().text);
            out.name_line = cur().line;
            advance();
            if (at_punct("<")) {
                // Could be template args of a qualifier (Foo<T>::bar) or of the
                // terminal name (specialization). Either way skip; flag it.
                std::size_t save = pos_;
                skip_angles();
                saw_template_args = true;
                (void)save;
            }
            if (at_punct("::")) {
                advance();
                continue;
            }
            return out;
        }
        return out.components.empty() ? std::nullopt : std::make_optional(out);
    }

    // Attempts to parse one declaration at scope level. Emits a FunctionSpan
    // when it turns out to be a function definition with a body.
    void parse_declaration(bool is_template, bool is_extern_c) {
        // Leading specifiers and attributes.
        while (!eof()) {
            if (cur().kind == TokKind::Identifier && is_decl_specifier(cur().text)) {
                advance();
                continue;
            }
            if (at_ident("__attribute__")) {
                advance();
                if (at_punct("("))
                    skip_balanced("(", ")");
                continue;
            }
            if (at_ident("alignas")) {
                advance();
                if (at_punct("("))
                    skip_balanced("(", ")");
                continue;
            }
            if (at_punct("[")) {
                skip_balanced("[", "]"); // [[attribute]]
                continue;
            }
            break;
        }
        if (eof())
            return;

        // Walk the type-and-declarator region looking for the declarator '('.
        // Anything that ends the declaration first (';', '=', '{' as an
        // initializer) means "not a function definition".
        std::optional<DeclName> decl_name;
        bool saw_template_args = false;
        bool unsupported_declarator = false;
        std::string unsupported_reason;

        while (!eof()) {
            if (at_punct(";")) {
                advance();
                return;
            }
            if (at_punct("}")) // enclosing scope closes
                return;
            if (at_punct("=")) { // variable initializer
                skip_to_semicolon();
                return;
            }
            if (at_punct("{")) { // brace initializer at declaration level
                skip_balanced("{", "}");
                skip_to_semicolon();
                return;
            }
            if (at_punct("<")) {
                skip_angles();
                saw_template_args = true;
                continue;
            }
            if (at_punct("*") || at_punct("&") || at_punct("&&") || at_punct("::")) {
                advance();
                continue;
            }
            if (cur().kind == TokKind::Identifier && is_builtin_keyword(cur().text)) {
                advance(); // builtin type keywords can never be declarator-ids
                continue;
            }
            if (at_punct("(")) {
                // '(' with no declarator-id yet: function-pointer declarator or
                // parenthesized declarator. Find an id inside for the span name.
                unsupported_declarator = true;
                unsupported_reason = "parenthesized-declarator";
                std::size_t save = pos_;
                skip_balanced("(", ")");
                // Best-effort name: the identifier preceding an inner '(' if
                // any (the declarator-id of a function-pointer-returning
                // function), else the last identifier in the group.
                DeclName synth;
                for (std::size_t k = save; k < pos_; ++k) {
                    if (toks_[k].kind != TokKind::Identifier)
                        continue;
                    bool before_paren = k + 1 < pos_ && toks_[k + 1].kind == TokKind::Punct &&
                                        toks_[k + 1].text == "(";
                    if (synth.components.empty() || before_paren) {
                        synth.components = {toks_[k].text};
                        synth.name_line = toks_[k].line;
                    }
                }
                if (!synth.components.empty())
                    decl_name = synth;
                if (at_punct("(")) // the parameter list follows
                    break;
                skip_to_semicolon();
                return;
            }
            if (cur().kind == TokKind::Identifier || at_punct("~")) {
                bool args_before = saw_template_args;
                auto name = parse_declarator_id(saw_template_args);
                if (!name) {
                    skip_to_semicolon();
                    return;
                }
                (void)args_before;
                if (at_punct("(")) {
                    decl_name = name;
                    break;
                }
                // Not followed by '(': this was the type (or a variable name);
                // keep walking.
                continue;
            }
            if (cur().kind == TokKind::Number || cur().kind == TokKind::String ||
                cur().kind == TokKind::CharLit) {
                skip_to_semicolon();
                return;
            }
            advance();
        }
        if (eof() || !at_punct("(") || !decl_name)
            return;

        // Capture the parameter list.
        std::size_t params_begin = pos_ + 1;
        skip_balanced("(", ")");
        std::size_t params_end = pos_ - 1; // token index of ')'

        // Post-parameter qualifiers.
        bool is_const_member = false;
        bool trailing_return = false;
        while (!eof()) {
            if (at_ident("const")) {
                is_const_member = true;
                advance();
                continue;
            }
            if (at_ident("volatile") || at_ident("override") || at_ident("final") ||
                at_ident("mutable")) {
                advance();
                continue;
            }
            if (at_punct("&") || at_punct("&&")) {
                advance();
                continue;
            }
            if (at_ident("noexcept")) {
                advance();
                if (at_punct("("))
                    skip_balanced("(", ")");
                continue;
            }
            if (at_ident("throw")) {
                advance();
                if (at_punct("("))
                    skip_balanced("(", ")");
                continue;
            }
            if (at_punct("->")) {
                trailing_return = true;
                advance();
                while (!eof() && !at_punct("{") && !at_punct(";") && !at_punct("="))
                    if (at_punct("<"))
                        skip_angles();
                    else
                        advance();
                continue;
            }
            if (at_punct("[")) {
                skip_balanced("[", "]");
                continue;
            }
            break;
        }

        // Constructor initializer list.
        if (at_punct(":")) {
            advance();
            while (!eof()) {
                // member-or-base [<...>] ( ... ) | { ... }
                while (!eof() && (cur().kind == TokKind::Identifier || at_punct("::")))
                    advance();
                if (at_punct("<"))
                    skip_angles();
                if (at_punct("("))
                    skip_balanced("(", ")");
                else if (at_punct("{") ) {
                    // Distinguish brace-init from the body: a body brace is
                    // preceded by ')' or '}' of the previous initializer; a
                    // brace-init directly follows the member name. We reached
                    // here right after a name, so this is a brace initializer.
                    skip_balanced("{", "}");
                }
                if (at_punct(",")) {
                    advance();
                    continue;
                }
                break;
            }
        }

        bool has_body = false;
        int body_end_line = 0;
        if (at_ident("try")) { // function-try-block
            advance();
            if (at_punct(":")) {
                while (!eof() && !at_punct("{"))
                    advance();
            }
            if (at_punct("{")) {
                body_end_line = skip_body();
                has_body = true;
                while (at_ident("catch")) {
                    advance();
                    if (at_punct("("))
                        skip_balanced("(", ")");
                    if (at_punct("{"))
                        body_end_line = skip_body();
                }
            }
        } else if (at_punct("{")) {
            body_end_line = skip_body();
            has_body = true;
        } else if (at_punct("=")) {
            skip_to_semicolon(); // = default / = delete / = 0
            return;
        } else {
            skip_to_semicolon();
            return;
        }
        if (!has_body)
            return;

        // Assemble the span.
        FunctionSpan span;
        span.file = path_;
        span.span = LineRange{decl_name->name_line, body_end_line};
        bool enclosing_template = is_template;
        std::vector<std::string> qname;
        std::string enclosing_class;
        for (const auto& s : scopes_) {
            enclosing_template = enclosing_template || s.is_template;
            if (s.kind == Scope::Kind::Class)
                enclosing_class = s.name;
            if (s.kind != Scope::Kind::ExternC)
                qname.push_back(s.name);
        }
        span.is_template = enclosing_template;
        for (const auto& c : decl_name->components)
            qname.push_back(c);
        span.signature.qualified_name = std::move(qname);
        span.signature.is_const_member = is_const_member;
        span.signature.is_extern_c = is_extern_c;
        for (const auto& s : scopes_)
            if (s.kind == Scope::Kind::ExternC)
                span.signature.is_extern_c = true;

        // Classify unsupported declarators before attempting parameter parse.
        const std::string& terminal = span.signature.terminal_name();
        if (unsupported_declarator)
            span.unsupported = unsupported_reason;
        else if (decl_name->is_dtor)
            span.unsupported = "destructor";
        else if (decl_name->is_operator)
            span.unsupported = "operator";
        else if (decl_name->components.size() >= 2 &&
                 decl_name->components[decl_name->components.size() - 2] == terminal)
            span.unsupported = "constructor"; // X::X out-of-class definition
        else if (!enclosing_class.empty() && decl_name->components.size() == 1 &&
                 terminal == enclosing_class)
            span.unsupported = "constructor"; // in-class X()
        else if (trailing_return)
            span.unsupported = "trailing-return-type";
        else if (saw_template_args)
            span.unsupported = "template-id";

        if (span.unsupported.empty()) {
            std::string reason;
            auto params = parse_parameter_types(params_begin, params_end, reason);
            if (!reason.empty())
                span.unsupported = reason;
            else
                span.signature.parameters = std::move(params);
        }
        results_.push_back(std::move(span));
    }

    // Skips a function body; cursor on '{'. Returns the closing brace line.
    int skip_body() {
        open_brace();
        int depth = 1;
        while (!eof()) {
            if (at_punct("{")) {
                ++depth;
                open_brace();
                continue;
            }
            if (at_punct("}")) {
                --depth;
                int line = cur().line;
                close_brace();
                if (depth == 0)
                    return line;
                continue;
            }
            advance();
        }
        unbalanced();
    }

    // -- parameter type parsing -------------------------------------------------

    std::vector<TypeExpr> parse_parameter_types(std::size_t begin, std::size_t end,
                                                std::string& reason) {
        std::vector<TypeExpr> params;
        if (begin >= end)
            return params; // empty list
        // Split at top-level commas.
        std::vector<std::pair<std::size_t, std::size_t>> groups;
        std::size_t group_start = begin;
        int paren = 0, angle = 0, bracket = 0, brace = 0;
        for (std::size_t k = begin; k < end; ++k) {
            const Token& t = toks_[k];
            if (t.kind == TokKind::Punct) {
                if (t.text == "(") ++paren;
                else if (t.text == ")") --paren;
                else if (t.text == "[") ++bracket;
                else if (t.text == "]") --bracket;
                else if (t.text == "{") ++brace;
                else if (t.text == "}") --brace;
                else if (t.text == "<") ++angle;
                else if (t.text == ">") angle = angle > 0 ? angle - 1 : 0;
                else if (t.text == ">>") angle = angle > 1 ? angle - 2 : 0;
                else if (t.text == "," && paren == 0 && angle == 0 && bracket == 0 && brace == 0) {
                    groups.emplace_back(group_start, k);
                    group_start = k + 1;
                }
            }
        }
        groups.emplace_back(group_start, end);

        // f(void) is an empty parameter list.
        if (groups.size() == 1 && groups[0].second - groups[0].first == 1 &&
            toks_[groups[0].first].kind == TokKind::Identifier &&
            toks_[groups[0].first].text == "void")
            return params;

        for (auto [gb, ge] : groups) {
            auto type = parse_one_parameter(gb, ge, reason);
            if (!reason.empty())
                return {};
            params.push_back(std::move(*type));
        }
        return params;
    }

    std::optional<TypeExpr> parse_one_parameter(std::size_t begin, std::size_t end,
                                                std::string& reason) {
        std::size_t k = begin;
        auto fail = [&](std::string r) {
            reason = std::move(r);
            return std::nullopt;
        };
        if (k >= end)
            return fail("empty-parameter");

        auto word = [&](std::size_t idx) -> const std::string* {
            if (idx < end && toks_[idx].kind == TokKind::Identifier)
                return &toks_[idx].text;
            return nullptr;
        };
        auto punct_at = [&](std::size_t idx, std::string_view p) {
            return idx < end && toks_[idx].kind == TokKind::Punct && toks_[idx].text == p;
        };

        if (punct_at(k, "...") )
            return fail("variadic");

        bool leading_const = false;
        // Leading qualifiers and elaborated keywords.
        while (k < end) {
            const std::string* w = word(k);
            if (!w)
                break;
            if (*w == "const") {
                leading_const = true;
                ++k;
                continue;
            }
            if (*w == "volatile")
                return fail("volatile");
            if (is_elaborated_keyword(*w) || *w == "typename") {
                ++k;
                continue;
            }
            break;
        }
        if (k >= end)
            return fail("missing-type");

        // Core type.
        TypeExpr core;
        if (word(k) && is_builtin_keyword(*word(k))) {
            std::vector<std::string> words;
            while (k < end && word(k) && is_builtin_keyword(*word(k)))
                words.push_back(toks_[k++].text);
            auto b = classify_builtin(words);
            if (!b)
                return fail("invalid-builtin-combination");
            core = make_builtin(*b);
        } else if (word(k) || punct_at(k, "::")) {
            std::vector<std::string> components;
            if (punct_at(k, "::"))
                ++k;
            while (k < end && word(k)) {
                components.push_back(toks_[k].text);
                ++k;
                if (punct_at(k, "<"))
                    return fail("template-id-parameter");
                if (punct_at(k, "::")) {
                    ++k;
                    continue;
                }
                break;
            }
            if (components.empty())
                return fail("missing-type");
            if (components.back() == "decltype")
                return fail("decltype");
            core = make_named(std::move(components));
        } else if (punct_at(k, "(")) {
            return fail("function-pointer");
        } else {
            return fail("unrecognized-declarator");
        }

        // East const.
        if (word(k) && *word(k) == "const") {
            leading_const = true;
            ++k;
        }
        if (leading_const)
            core = make_const(std::move(core));

        // Pointer/reference suffixes.
        while (k < end && toks_[k].kind == TokKind::Punct) {
            const std::string& p = toks_[k].text;
            if (p == "*") {
                core = make_pointer(std::move(core));
                ++k;
                if (word(k) && *word(k) == "const") {
                    core = make_const(std::move(core));
                    ++k;
                }
                if (word(k) && *word(k) == "volatile")
                    return fail("volatile");
                continue;
            }
            if (p == "&") {
                core = make_lvalue_ref(std::move(core));
                ++k;
                break;
            }
            if (p == "&&") {
                core = make_rvalue_ref(std::move(core));
                ++k;
                break;
            }
            break;
        }

        // Optional parameter name.
        if (word(k) && !is_builtin_keyword(*word(k)) && *word(k) != "const") {
            ++k;
        }
        // Default argument: everything after '=' is ignored.
        if (punct_at(k, "=")) {
            k = end;
        }
        if (k != end) {
            if (punct_at(k, "["))
                return fail("array-parameter");
            if (punct_at(k, "("))
                return fail("function-pointer");
            return fail("unrecognized-declarator");
        }
        return core;
    }
};

} // namespace detail

/// Extracts every function definition (with a body) from the file. Member
/// functions defined in-class and out-of-class, free functions, and function
/// templates (flagged) are all reported; declarations without bodies are not.
/// Output order equals source order.
inline std::vector<FunctionSpan> scan_file(std::string_view text, std::string path,
                                           ScanOptions options = {}) {
    TokenStream stream = strip_noncode(text);
    detail::Scanner scanner(stream, std::move(path), options);
    return scanner.run();
}

} // namespace sicov
