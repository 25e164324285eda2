#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace prd {

using Rng = std::mt19937_64;

// One splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives an independent child seed from a parent seed and a stream index.
//
// child = splitmix64 output for state (parent + index * 0x9E3779B97F4A7C15). Every
// component that needs randomness (env resets, action sampling, init,
// minibatch shuffles) draws its seed this way from the single run seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

// Same, keyed by a stream name (FNV-1a hash of the name is used as index).
std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream);

// Uniform double in [0, 1) with 53 random bits; portable across standard libraries.
double uniform01(Rng& rng);

// Samples an index from a probability vector by CDF inversion.
int sample_categorical(std::span<const double> probs, Rng& rng);

}  // namespace prd
