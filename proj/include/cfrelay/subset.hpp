#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace cfrelay {

// Relay subset S of {1..n}; bit i-1 set <=> relay i in S.
using SubsetId = std::uint32_t;

constexpr int max_relays = 16;

constexpr SubsetId full_set(int n) { return n == 0 ? 0u : ((SubsetId{1} << n) - 1u); }

constexpr bool contains(SubsetId s, int relay) { return (s >> (relay - 1)) & 1u; }

constexpr SubsetId singleton(int relay) { return SubsetId{1} << (relay - 1); }

constexpr int subset_size(SubsetId s) { return std::popcount(s); }

// Relay indices (1-based) in ascending order.
inline std::vector<int> members(SubsetId s) {
    std::vector<int> out;
    for (int i = 1; s != 0; ++i, s >>= 1)
        if (s & 1u)
            out.push_back(i);
    return out;
}

// Calls fn(sub) for every sub ⊆ s, starting at s itself and ending with the empty set.
template <class Fn>
void for_each_submask(SubsetId s, Fn&& fn) {
    SubsetId sub = s;
    while (true) {
        fn(sub);
        if (sub == 0)
            break;
        sub = (sub - 1) & s;
    }
}

} // namespace cfrelay
