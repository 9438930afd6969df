// Small deterministic generator (splitmix64). Used for perturbation trials
// and seeded test corpora; identical streams on every platform.
#pragma once

#include "chaincert/rational.hpp"

#include <cstdint>

namespace chaincert {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound).
    std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : next() % bound; }

    /// Random rational k/den with k in [0, den], so the value lies in [0,1].
    Rat rational(std::uint64_t den) {
        return Rat(BigInt(below(den + 1)), BigInt(den));
    }

private:
    std::uint64_t state_;
};

}  // namespace chaincert
