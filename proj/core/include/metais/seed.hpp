#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace metais {

using Rng = std::mt19937_64;

/// Sub-seed for a pipeline stage: splitmix64(master ^ fnv1a64(label)).
/// Stages never share a stream, so resizing one stage leaves the others'
/// randomness untouched.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

}  // namespace metais
