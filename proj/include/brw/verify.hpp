#pragma once

#include <string>
#include <vector>

namespace brw {

struct CriterionResult {
    std::string id;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    int workers = 0;    // 0 = hardware concurrency, capped at 8
    bool quick = false; // reduced replication smoke mode; not the official gate
    std::string fault;  // negative-control injection, e.g. "q-sign"
};

/// Runs the full acceptance suite (A1-A13) on the builtin model set.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

bool all_passed(const std::vector<CriterionResult>& results);

/// One "[PASS]/[FAIL] id title: detail [t s]" line per criterion.
std::string format_results(const std::vector<CriterionResult>& results);

}  // namespace brw
