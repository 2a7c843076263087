#pragma once

#include <cstdint>
#include <vector>

namespace brw {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// splitmix64 stream. Replication streams are derived by hashing
/// (master_seed, replication index), so the draw sequence of a replication
/// depends only on those two values — never on worker count or scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng for_replication(std::uint64_t master_seed, std::uint64_t replication) {
        return Rng(mix64(master_seed ^ mix64(replication + 0x5851f42d4c957f2dull)));
    }

    std::uint64_t next() { return mix64(state_ += 0x9e3779b97f4a7c15ull); }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Inverse-CDF sampler for a small finite integer law.
class DiscreteSampler {
public:
    DiscreteSampler(std::vector<int> values, const std::vector<double>& probs);

    int sample(Rng& rng) const {
        const double u = rng.uniform01();
        std::size_t i = 0;
        while (i + 1 < cdf_.size() && u >= cdf_[i]) ++i;
        return values_[i];
    }

private:
    std::vector<int> values_;
    std::vector<double> cdf_;
};

}  // namespace brw
