#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sicov/error.hpp"

namespace sicov {

/// One translation unit's compile command, as recorded in a compilation
/// database (the compile_commands.json interchange format).
struct CompileCommand {
    std::string file;
    std::string directory;
    std::vector<std::string> arguments;

    friend bool operator==(const CompileCommand&, const CompileCommand&) = default;
};

/// The frontend context a command implies: include search order, macro
/// definitions, and the selected language level.
struct FrontendConfig {
    std::vector<std::string> include_dirs;
    std::vector<std::string> defines; // name or name=value
    std::string language_level;      // e.g. "c++17"

    friend bool operator==(const FrontendConfig&, const FrontendConfig&) = default;
};

namespace detail {

// POSIX-ish shell tokenizer: single quotes literal, double quotes allow
// backslash escapes, unquoted backslash escapes the next character.
inline std::vector<std::string> shell_split(std::string_view command) {
    std::vector<std::string> out;
    std::string token;
    bool in_token = false;
    std::size_t i = 0;
    while (i < command.size()) {
        char c = command[i];
        if (c == ' ' || c == '\t' || c == '\n') {
            if (in_token) {
                out.push_back(std::move(token));
                token.clear();
                in_token = false;
            }
            ++i;
            continue;
        }
        in_token = true;
        if (c == '\'') {
            ++i;
            while (i < command.size() && command[i] != '\'')
                token.push_back(command[i++]);
            ++i; // closing quote
            continue;
        }
        if (c == '"') {
            ++i;
            while (i < command.size() && command[i] != '"') {
                if (command[i] == '\\' && i + 1 < command.size() &&
                    (command[i + 1] == '"' || command[i + 1] == '\\' || command[i + 1] == '$' ||
                     command[i + 1] == '`')) {
                    token.push_back(command[i + 1]);
                    i += 2;
                    continue;
                }
                token.push_back(command[i++]);
            }
            ++i;
            continue;
        }
        if (c == '\\' && i + 1 < command.size()) {
            token.push_back(command[i + 1]);
            i += 2;
            continue;
        }
        token.push_back(c);
        ++i;
    }
    if (in_token)
        out.push_back(std::move(token));
    return out;
}

inline std::string normalize_against(const std::string& directory, const std::string& file) {
    std::filesystem::path p(file);
    if (p.is_relative())
        p = std::filesystem::path(directory) / p;
    return p.lexically_normal().string();
}

} // namespace detail

/// Loads a compilation database: an array of objects with `directory`,
/// `file`, and either `arguments` (array) or `command` (string, shell-split
/// honoring quotes).
inline std::vector<CompileCommand> load_compdb(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw not_found_error("compilation database not found: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error("compilation database is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_array())
        throw parse_error("compilation database must be a JSON array");

    std::vector<CompileCommand> db;
    db.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc[i];
        auto bad = [&](const std::string& why) {
            return parse_error("compilation database entry " + std::to_string(i) + ": " + why);
        };
        if (!entry.is_object())
            throw bad("not an object");
        CompileCommand cmd;
        if (!entry.contains("file") || !entry["file"].is_string())
            throw bad("missing 'file'");
        cmd.file = entry["file"].get<std::string>();
        if (cmd.file.empty())
            throw bad("empty 'file'");
        if (entry.contains("directory") && entry["directory"].is_string())
            cmd.directory = entry["directory"].get<std::string>();
        if (entry.contains("arguments")) {
            if (!entry["arguments"].is_array())
                throw bad("'arguments' is not an array");
            for (const auto& a : entry["arguments"]) {
                if (!a.is_string())
                    throw bad("non-string argument");
                cmd.arguments.push_back(a.get<std::string>());
            }
        } else if (entry.contains("command")) {
            if (!entry["command"].is_string())
                throw bad("'command' is not a string");
            cmd.arguments = detail::shell_split(entry["command"].get<std::string>());
        } else {
            throw bad("needs 'arguments' or 'command'");
        }
        if (cmd.arguments.empty())
            throw bad("empty command line");
        db.push_back(std::move(cmd));
    }
    return db;
}

/// Finds the first entry whose normalized absolute path matches the query.
/// A relative query is resolved against each entry's directory. Duplicate
/// entries for one file: first wins.
inline std::optional<CompileCommand> lookup(const std::vector<CompileCommand>& db,
                                            const std::string& file) {
    std::filesystem::path query(file);
    for (const auto& entry : db) {
        std::string entry_abs = detail::normalize_against(entry.directory, entry.file);
        std::string query_abs = query.is_absolute()
                                    ? query.lexically_normal().string()
                                    : detail::normalize_against(entry.directory, file);
        if (entry_abs == query_abs)
            return entry;
    }
    return std::nullopt;
}

/// Collects -I include directories, -D macro definitions, and the -std=
/// language level from a command line; all other tokens are skipped.
inline FrontendConfig extract_frontend_args(const CompileCommand& cmd) {
    FrontendConfig config;
    const auto& args = cmd.arguments;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "-I" || a == "-D") {
            if (i + 1 < args.size()) {
                if (a == "-I")
                    config.include_dirs.push_back(args[++i]);
                else
                    config.defines.push_back(args[++i]);
            }
            continue;
        }
        if (a.rfind("-I", 0) == 0) {
            config.include_dirs.push_back(a.substr(2));
            continue;
        }
        if (a.rfind("-D", 0) == 0) {
            config.defines.push_back(a.substr(2));
            continue;
        }
        if (a.rfind("-std=", 0) == 0) {
            config.language_level = a.substr(5);
            continue;
        }
        if (a.rfind("--std=", 0) == 0) {
            config.language_level = a.substr(6);
            continue;
        }
    }
    return config;
}

} // namespace sicov
