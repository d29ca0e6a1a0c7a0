// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace mmblock {

/// SplitMix64 finalizer. Used to derive independent, platform-stable seeds
/// and sampling keys from a master seed.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Hashes a master seed together with a sequence of integer tags.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept;

/// Same as derive_seed, with a string salt folded in first.
std::uint64_t derive_seed(std::uint64_t master, std::string_view salt,
                          std::initializer_list<std::uint64_t> tags) noexcept;

/// Maps a 64-bit key to [0, 1) using its top 53 bits.
double unit_interval(std::uint64_t key) noexcept;

/// FNV-1a over bytes; stable across platforms, used for config hashes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace mmblock
