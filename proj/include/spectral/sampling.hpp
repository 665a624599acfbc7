#pragma once

#include "spectral/model.hpp"
#include "spectral/polybasis.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spectral {

/// Stateless generator: a uniform in (0, 1) determined only by its key.
/// Streams separate unrelated uses of one seed.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);

enum class SampleStream : std::uint64_t {
    lhs_permutation = 1,
    lhs_offset = 2,
    monte_carlo = 3,
};

/// Realizations in natural units, row-major (scenario x germ), equal weights.
struct ScenarioSet {
    std::size_t count = 0;
    std::size_t dims = 0;
    std::vector<double> values;
    std::vector<double> probabilities;
    std::uint64_t seed = 0;
    std::string method;

    double at(std::size_t scenario, std::size_t dim) const { return values[scenario * dims + dim]; }
    std::span<const double> row(std::size_t scenario) const {
        return std::span<const double>(values).subspan(scenario * dims, dims);
    }
};

/**
 * Latin hypercube sample: per dimension, stratum k of n receives exactly one
 * point at (k + u) / n with u uniform, mapped through the inverse CDF. The
 * assignment of strata to scenarios is an independent seeded permutation per
 * dimension. Every draw depends only on (seed, dimension, stratum), so the set
 * is identical however it is computed.
 */
ScenarioSet lhs_sample(std::span<const Distribution> germs, std::size_t n_s, std::uint64_t seed);

/// Independent draw number `index` of all germs (Monte Carlo stream).
void monte_carlo_draw(std::span<const Distribution> germs, std::uint64_t seed, std::uint64_t index,
                      std::span<double> out);

std::vector<Distribution> germ_distributions(const StochModel& model);

} // namespace spectral
