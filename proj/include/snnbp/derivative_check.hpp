#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnbp/problem.hpp"

namespace snnbp {

// Central-difference validation of every analytic partial in a ProblemSpec.
// Errors are relative: max|analytic - fd| / (1 + max|analytic|) per callback.
struct DerivativeReport {
    struct Entry {
        std::string callback;
        double max_rel_error = 0.0;
    };
    std::vector<Entry> entries;
    bool passed = true;
    std::string first_failure;  // callback name of the first entry above tol

    double error_for(const std::string& callback) const;
};

DerivativeReport check_problem_derivatives(const ProblemSpec& spec, int trials, double tol,
                                           std::uint64_t seed);

}  // namespace snnbp
