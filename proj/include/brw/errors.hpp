#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace brw {

// Exit-code mapping used by the CLI: validation/configuration -> 1,
// numerical non-convergence -> 2, acceptance failure -> 3.

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double last_gap)
        : std::runtime_error(what + " (last gap " + std::to_string(last_gap) + ")"),
          last_gap(last_gap) {}
    double last_gap;
};

// Carries every invariant violation found, not just the first.
struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> issues_)
        : std::runtime_error(join(issues_)), issues(std::move(issues_)) {}
    std::vector<std::string> issues;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& e : v) {
            if (!s.empty()) s += "; ";
            s += e;
        }
        return s;
    }
};

}  // namespace brw
