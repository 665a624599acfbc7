#include "spectral/sampling.hpp"

#include "spectral/error.hpp"

namespace spectral {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    // 53 random bits, centred in their cell so 0 and 1 never occur
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

ScenarioSet lhs_sample(std::span<const Distribution> germs, std::size_t n_s, std::uint64_t seed) {
    if (n_s == 0) throw InputError("at least one scenario is required");
    ScenarioSet set;
    set.count = n_s;
    set.dims = germs.size();
    set.values.assign(n_s * germs.size(), 0.0);
    set.probabilities.assign(n_s, 1.0 / static_cast<double>(n_s));
    set.seed = seed;
    set.method = "lhs";

    std::vector<std::size_t> perm(n_s);
    for (std::size_t d = 0; d < germs.size(); ++d) {
        for (std::size_t i = 0; i < n_s; ++i) perm[i] = i;
        // Fisher-Yates driven by the counter generator
        for (std::size_t i = n_s; i-- > 1;) {
            const double u = counter_uniform(seed, static_cast<std::uint64_t>(SampleStream::lhs_permutation), d, i);
            const auto j = std::min(i, static_cast<std::size_t>(u * static_cast<double>(i + 1)));
            std::swap(perm[i], perm[j]);
        }
        for (std::size_t s = 0; s < n_s; ++s) {
            const std::size_t stratum = perm[s];
            const double u = counter_uniform(seed, static_cast<std::uint64_t>(SampleStream::lhs_offset), d, stratum);
            const double p = (static_cast<double>(stratum) + u) / static_cast<double>(n_s);
            set.values[s * set.dims + d] = germs[d].quantile(p);
        }
    }
    return set;
}

void monte_carlo_draw(std::span<const Distribution> germs, std::uint64_t seed, std::uint64_t index,
                      std::span<double> out) {
    if (out.size() != germs.size()) throw InputError("draw buffer size mismatch");
    for (std::size_t d = 0; d < germs.size(); ++d) {
        out[d] = germs[d].quantile(counter_uniform(seed, static_cast<std::uint64_t>(SampleStream::monte_carlo), index, d));
    }
}

std::vector<Distribution> germ_distributions(const StochModel& model) {
    std::vector<Distribution> out;
    out.reserve(model.germs().size());
    for (const auto& g : model.germs()) out.push_back(g.distribution);
    return out;
}

} // namespace spectral
