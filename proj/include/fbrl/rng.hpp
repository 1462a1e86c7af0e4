#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fbrl {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the stream named `name`/`index` under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
    return Rng(derive_seed(master, name, index));
}

/// Uniform in [0,1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0,n).
inline int uniform_int(Rng& rng, int n) {
    return static_cast<int>((static_cast<unsigned __int128>(rng()) * static_cast<unsigned>(n)) >> 64);
}

/// Standard normal via Box-Muller, portable across standard libraries.
double standard_normal(Rng& rng);

/// Index drawn from the probability vector p[0..n).
int sample_discrete(const double* p, int n, Rng& rng);

/// Geometric number of failures before the first success of a coin with success prob q.
int sample_geometric(double q, Rng& rng);

} // namespace fbrl
