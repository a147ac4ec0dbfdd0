#pragma once

#include <stdexcept>
#include <string>

namespace sicov {

// Input text could not be parsed (diffs, profile lists, coverage records,
// compilation databases). Carries the 1-based line number when known.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

// Source scanning failed (unterminated constructs, unbalanced braces,
// nesting beyond the configured limit).
class scan_error : public std::runtime_error {
public:
    explicit scan_error(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

// A signature falls outside the mangleable subset.
class unmangleable_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A required entity (file, build id, table entry) does not exist.
class not_found_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writing would clobber an existing entity and no force flag was given.
class conflict_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A pipeline stage was invoked without its inputs (e.g. a changed file
// that has no scan result).
class pipeline_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sicov
