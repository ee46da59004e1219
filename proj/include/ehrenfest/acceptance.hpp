#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

// The acceptance suite, criteria 1..8. Shared by the selftest subcommand and
// the acceptance test binary.
namespace ehrenfest::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr int criterion_count = 8;

/// Runs one criterion; never throws (errors become a failed result).
CriterionResult run_criterion(int id, std::uint64_t seed = 2024);

/// Runs every criterion in order, writing each line to `progress` as soon as
/// it is known.
std::vector<CriterionResult> run_all(std::uint64_t seed = 2024, std::ostream* progress = nullptr);

/// "criterion N: PASS|FAIL  title  (detail) [s]"
std::string format_line(const CriterionResult& r);

}  // namespace ehrenfest::acceptance
