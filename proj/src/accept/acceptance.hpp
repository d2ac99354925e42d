#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kinetic::accept {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

/// Runs every acceptance criterion at its pinned tolerance, printing one
/// PASS/FAIL line per criterion to `log`. Returns the per-criterion results.
std::vector<CriterionResult> run_all(int threads, std::ostream& log);

/// Run a subset (1-based ids); empty selection = all.
std::vector<CriterionResult> run_selected(const std::vector<int>& ids, int threads, std::ostream& log);

bool all_pass(const std::vector<CriterionResult>& results);

} // namespace kinetic::accept
