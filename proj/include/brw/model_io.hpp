#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "brw/model.hpp"

namespace brw {

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line, int column)
        : std::runtime_error("line " + std::to_string(line) + ", col " +
                             std::to_string(column) + ": " + what),
          line(line), column(column) {}
    int line;
    int column;
};

/// Parses "0.25" or "1/4". Throws ParseError on malformed input.
double parse_probability(const std::string& token, int line, int column);

/// Loads a model document:
///
///   label  <text>
///   mode   subcritical | supercritical
///   jump
///     <offset> <probability>
///     ...
///   offspring
///     <count> <probability>
///     ...
///
/// '#' starts a comment; probabilities may be decimals or p/q rationals.
ModelSpec load_model(std::istream& in);
ModelSpec load_model_file(const std::string& path);

/// Every problem with the document at once (parse errors stop at the first
/// unreadable line; invariant violations are all collected). Empty = valid.
std::vector<std::string> validate_model_file(const std::string& path);

void write_model_file(const ModelSpec& model, const std::string& path);

}  // namespace brw
