#pragma once

#include <cstdint>

namespace fheio {

// Byte quantities use binary units; "Gb/s" link ratings use decimal bits.
inline constexpr std::uint64_t kib = 1ull << 10;
inline constexpr std::uint64_t mib = 1ull << 20;
inline constexpr std::uint64_t gib = 1ull << 30;
inline constexpr std::uint64_t tib = 1ull << 40;

// 400 Gb/s Ethernet = 400e9 bits/s = 50e9 B/s.
inline constexpr std::uint64_t gbit_per_s_in_bytes = 1000ull * 1000ull * 1000ull / 8ull;

}  // namespace fheio
