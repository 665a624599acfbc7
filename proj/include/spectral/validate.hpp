#pragma once

#include "spectral/galerkin.hpp"
#include "spectral/model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace spectral {

struct ConstraintViolation {
    std::size_t constraint = 0;
    std::string name;
    std::size_t violations = 0;
    std::size_t samples = 0;
    double probability = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double target = 0.0;
    bool above_target = false;
};

struct ViolationReport {
    std::vector<ConstraintViolation> constraints;  // inequalities only, model order
    std::size_t samples = 0;
    std::size_t above_target = 0;
    double max_probability = 0.0;
    std::string max_constraint;
    double threshold = 1e-9;

    double fraction_above_target() const;
};

/// Exact (Clopper-Pearson) two-sided interval for k successes in n trials.
std::pair<double, double> binomial_interval(std::size_t k, std::size_t n, double confidence = 0.95);

struct ValidationSettings {
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    /// Target for inequalities without their own eps.
    double epsilon = 0.05;
    /// Residuals above this count as violations.
    double threshold = 1e-9;
};

/**
 * Draws `samples` independent realizations (counter-seeded per sample), evaluates
 * the policy and every inequality residual. Counts are exact integers, so the
 * report does not depend on how the work is split across threads.
 */
ViolationReport estimate_violations(const RecoursePolicy& policy, const StochModel& model,
                                    const ValidationSettings& settings = {});

struct CostEstimate {
    double mean = 0.0;
    double stddev = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t samples = 0;
};

/// Monte Carlo mean of the objective through the policy, normal-approximation 95% CI.
CostEstimate estimate_cost(const RecoursePolicy& policy, const StochModel& model, std::size_t samples,
                           std::uint64_t seed);

struct EqualityResidual {
    double max_abs = 0.0;
    std::string worst_constraint;
    std::size_t samples = 0;
};

/// Largest |g_j(x, z(omega), omega)| over all equalities and sampled realizations.
EqualityResidual max_equality_residual(const RecoursePolicy& policy, const StochModel& model, std::size_t samples,
                                       std::uint64_t seed);

/// One row per inequality: name, count, probability, interval, target, flag.
void write_violation_csv(std::ostream& out, const ViolationReport& report);
/// "violations above target: k of n inequalities; max empirical violation p (name)"
std::string violation_summary(const ViolationReport& report);

} // namespace spectral
