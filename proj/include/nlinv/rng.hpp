#pragma once

#include <cstdint>
#include <random>

namespace nlinv {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Stream seed for a (base, a, b) key; independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Standard normal draw by Box-Muller on the raw engine output.
// Used instead of std::normal_distribution so that streams agree across standard libraries.
double standard_normal(Rng& rng);

// Uniform draw in [0, 1).
double uniform01(Rng& rng);

}  // namespace nlinv
