#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "sicov/error.hpp"
#include "sicov/scan.hpp"

namespace sicov {

/// A linker-level symbol: either an Itanium-encoded name (prefix "_Z") or
/// the plain function name for unmangled linkage (extern "C", main).
struct MangledName {
    std::string text;

    friend bool operator==(const MangledName&, const MangledName&) = default;
};

struct Mangleability {
    bool ok = true;
    std::string reason;

    explicit operator bool() const { return ok; }
};

namespace detail {

inline const char* builtin_code(Builtin b) {
    switch (b) {
    case Builtin::Void: return "v";
    case Builtin::Bool: return "b";
    case Builtin::Char: return "c";
    case Builtin::SChar: return "a";
    case Builtin::UChar: return "h";
    case Builtin::WChar: return "w";
    case Builtin::Short: return "s";
    case Builtin::UShort: return "t";
    case Builtin::Int: return "i";
    case Builtin::UInt: return "j";
    case Builtin::Long: return "l";
    case Builtin::ULong: return "m";
    case Builtin::LongLong: return "x";
    case Builtin::ULongLong: return "y";
    case Builtin::Float: return "f";
    case Builtin::Double: return "d";
    case Builtin::LongDouble: return "e";
    }
    return "";
}

inline bool valid_source_name(const std::string& name) {
    if (name.empty())
        return false;
    if (!is_ident_start(name[0]))
        return false;
    for (char c : name)
        if (!is_ident_char(c))
            return false;
    return true;
}

inline std::string source_name(const std::string& name) {
    return std::to_string(name.size()) + name;
}

// Itanium mangler for the supported TypeExpr subset, with the standard
// substitution table shared between nested-name prefixes and types.
class ItaniumMangler {
public:
    std::string mangle(const FunctionSignature& sig) {
        const auto& comps = sig.qualified_name;
        std::string out = "_Z";
        if (comps.size() > 1) {
            out += 'N';
            if (sig.is_const_member)
                out += 'K';
            out += nested_components(comps, /*include_last_in_table=*/false);
            out += 'E';
        } else {
            if (sig.is_const_member)
                throw unmangleable_error("const qualifier on a non-member function");
            out += source_name(comps.front());
        }
        if (sig.parameters.empty()) {
            out += 'v';
            return out;
        }
        for (const auto& param : sig.parameters)
            out += type(strip_toplevel_const(param));
        return out;
    }

private:
    std::vector<std::string> table_; // canonical keys, in registration order

    // Top-level cv-qualifiers of value parameters do not take part in the
    // function type (Itanium ABI).
    static const TypeExpr& strip_toplevel_const(const TypeExpr& t) {
        if (t.kind == TypeExpr::Kind::Const)
            return t.inner.front();
        return t;
    }

    static std::string key_of(const TypeExpr& t) {
        switch (t.kind) {
        case TypeExpr::Kind::Builtin: return builtin_code(t.builtin);
        case TypeExpr::Kind::Named: {
            std::string k;
            for (const auto& c : t.name)
                k += source_name(c);
            return k;
        }
        case TypeExpr::Kind::Const: return "K" + key_of(t.inner.front());
        case TypeExpr::Kind::Pointer: return "P" + key_of(t.inner.front());
        case TypeExpr::Kind::LvalueRef: return "R" + key_of(t.inner.front());
        case TypeExpr::Kind::RvalueRef: return "O" + key_of(t.inner.front());
        }
        return {};
    }

    int find(const std::string& key) const {
        for (std::size_t i = 0; i < table_.size(); ++i)
            if (table_[i] == key)
                return static_cast<int>(i);
        return -1;
    }

    void remember(const std::string& key) {
        if (find(key) < 0)
            table_.push_back(key);
    }

    static std::string sub_ref(int index) {
        if (index == 0)
            return "S_";
        int n = index - 1;
        std::string digits;
        do {
            int d = n % 36;
            digits.insert(digits.begin(), d < 10 ? char('0' + d) : char('A' + d - 10));
            n /= 36;
        } while (n > 0);
        return "S" + digits + "_";
    }

    // Emits the components of a qualified name with prefix substitution.
    // Cumulative prefixes become table entries; the terminal component joins
    // the table only when the name denotes a type.
    std::string nested_components(const std::vector<std::string>& comps, bool include_last_in_table) {
        std::string out;
        std::string running_key;
        std::size_t start = 0;
        // Longest already-known prefix (for types the full name is checked by
        // the caller, so only proper prefixes matter here).
        int best = -1;
        std::size_t best_len = 0;
        std::string probe;
        for (std::size_t i = 0; i + 1 <= comps.size(); ++i) {
            probe += source_name(comps[i]);
            std::size_t table_limit = include_last_in_table ? comps.size() : comps.size() - 1;
            if (i + 1 <= table_limit) {
                int idx = find(probe);
                if (idx >= 0) {
                    best = idx;
                    best_len = i + 1;
                }
            }
        }
        if (best >= 0) {
            out += sub_ref(best);
            start = best_len;
            for (std::size_t i = 0; i < best_len; ++i)
                running_key += source_name(comps[i]);
        }
        for (std::size_t i = start; i < comps.size(); ++i) {
            if (!valid_source_name(comps[i]))
                throw unmangleable_error("component is not a mangleable identifier: " + comps[i]);
            out += source_name(comps[i]);
            running_key += source_name(comps[i]);
            if (i + 1 < comps.size() || include_last_in_table)
                remember(running_key);
        }
        return out;
    }

    std::string type(const TypeExpr& t) {
        if (t.kind == TypeExpr::Kind::Builtin)
            return builtin_code(t.builtin); // builtins are never substituted
        const std::string key = key_of(t);
        int idx = find(key);
        if (idx >= 0)
            return sub_ref(idx);
        std::string out;
        switch (t.kind) {
        case TypeExpr::Kind::Const:
            out = "K" + type(t.inner.front());
            break;
        case TypeExpr::Kind::Pointer:
            out = "P" + type(t.inner.front());
            break;
        case TypeExpr::Kind::LvalueRef:
            out = "R" + type(t.inner.front());
            break;
        case TypeExpr::Kind::RvalueRef:
            out = "O" + type(t.inner.front());
            break;
        case TypeExpr::Kind::Named: {
            if (t.name.size() == 1) {
                if (!valid_source_name(t.name.front()))
                    throw unmangleable_error("type name is not a mangleable identifier: " +
                                             t.name.front());
                out = source_name(t.name.front());
            } else {
                out = "N" + nested_components(t.name, /*include_last_in_table=*/true) + "E";
                // nested_components registered the full name already
                return out;
            }
            break;
        }
        case TypeExpr::Kind::Builtin:
            break;
        }
        remember(key);
        return out;
    }
};

inline Mangleability check_type(const TypeExpr& t) {
    switch (t.kind) {
    case TypeExpr::Kind::Builtin:
        return {};
    case TypeExpr::Kind::Named:
        if (t.name.empty())
            return {false, "empty type name"};
        if (t.name.front() == "std")
            return {false, "std-type (typedef resolution out of scope)"};
        for (const auto& c : t.name)
            if (!valid_source_name(c))
                return {false, "type component not an identifier: " + c};
        return {};
    case TypeExpr::Kind::Const:
    case TypeExpr::Kind::Pointer:
    case TypeExpr::Kind::LvalueRef:
    case TypeExpr::Kind::RvalueRef:
        if (t.inner.size() != 1)
            return {false, "malformed type node"};
        return check_type(t.inner.front());
    }
    return {false, "unknown type node"};
}

} // namespace detail

/// Checks whether a signature falls inside the mangleable subset.
inline Mangleability is_mangleable(const FunctionSignature& sig) {
    if (sig.qualified_name.empty() || sig.terminal_name().empty())
        return {false, "empty name"};
    if (sig.is_extern_c || (sig.qualified_name.size() == 1 && sig.terminal_name() == "main"))
        return {}; // plain linkage name, nothing to encode
    if (sig.qualified_name.size() == 1 && sig.is_const_member)
        return {false, "const qualifier on a non-member function"};
    if (sig.qualified_name.front() == "std")
        return {false, "std-namespace"};
    for (const auto& comp : sig.qualified_name)
        if (!detail::valid_source_name(comp))
            return {false, "name component not an identifier: " + comp};
    if (sig.qualified_name.size() >= 2 &&
        sig.qualified_name[sig.qualified_name.size() - 2] == sig.terminal_name())
        return {false, "constructor"};
    for (const auto& param : sig.parameters) {
        auto r = detail::check_type(param);
        if (!r.ok)
            return r;
    }
    return {};
}

/// Span-level check: also rejects templates and declarators the scanner
/// reported as unsupported.
inline Mangleability is_mangleable(const FunctionSpan& span) {
    if (span.is_template)
        return {false, "template"};
    if (!span.unsupported.empty())
        return {false, span.unsupported};
    return is_mangleable(span.signature);
}

/// Produces the Itanium-ABI symbol for a supported signature. `main` and
/// extern "C" functions keep their plain names. Throws unmangleable_error
/// outside the subset.
inline MangledName mangle(const FunctionSignature& sig) {
    auto ok = is_mangleable(sig);
    if (!ok)
        throw unmangleable_error(ok.reason);
    if (sig.is_extern_c || (sig.qualified_name.size() == 1 && sig.terminal_name() == "main"))
        return {sig.terminal_name()};
    detail::ItaniumMangler mangler;
    return {mangler.mangle(sig)};
}

/// Name-only matching from diff-identified targets to signatures: every
/// signature whose terminal name is in `target_names` is returned, so all
/// overloads of a matched name come along.
inline std::vector<FunctionSignature>
match_targets_by_name(const std::unordered_set<std::string>& target_names,
                      const std::vector<FunctionSignature>& signatures) {
    std::vector<FunctionSignature> out;
    for (const auto& sig : signatures)
        if (target_names.count(sig.terminal_name()))
            out.push_back(sig);
    return out;
}

} // namespace sicov
