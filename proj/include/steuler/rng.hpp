#pragma once

#include <array>
#include <cstdint>

namespace steuler {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

/// Uniform in (0, 1] from 53 random bits.
double uniform_open0(std::uint32_t hi, std::uint32_t lo);

/// Standard normal draw fully determined by (seed, stream, index): one Philox
/// block with key = seed and counter = (index, stream), then Box-Muller.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace steuler
