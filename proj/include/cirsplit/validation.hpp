#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cirsplit {

/// Reference solution of the square-root drift equation
/// z' = -(b/2) z + (a/2 - c_sq/8) / z over [0, h], by embedded
/// Runge-Kutta-Fehlberg with adaptive steps. Independent of the
/// closed-form flow it is used to check.
double bernoulli_ode_reference(double z0, double a_tilde, double b_tilde, double c_in_sq_sum,
                               double h, double tol = 1e-12);

/// Test hooks: nonzero values corrupt the quantity under test so the
/// suite's failure path can be exercised.
struct ValidationTweaks {
    double bernoulli_offset = 0.0;
};

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CriterionResult> criteria;
    bool all_pass() const;
    std::string to_json() const;
};

/// Quick oracle checks: exact-transition moments of the square-root
/// process, jump-process decay mean, drift-flow closed form against the
/// adaptive integrator, and the weight reduction identity.
ValidationReport run_validation_suite(std::uint64_t seed, const ValidationTweaks& tweaks = {});

} // namespace cirsplit
