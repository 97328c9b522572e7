#pragma once

#include <vector>

#include "m2sp/common.hpp"

namespace m2sp {

// splitmix64: platform-independent stream, so seeded experiments reproduce
// bit-for-bit everywhere (std distributions are implementation-defined).
class Rng {
  public:
    explicit Rng(u64 seed) : state_(seed) {}

    u64 next() {
        u64 z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n) by rejection on the top multiple of n
    u64 below(u64 n) {
        u64 limit = n * ((~u64(0)) / n);
        u64 v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    double unit() { return double(next() >> 11) * 0x1.0p-53; }

  private:
    u64 state_;
};

// without-replacement sample of `size` positions from [0, n), rejection on duplicates
inline std::vector<u32> sample_indices(u64 n, u64 size, Rng& rng) {
    if (size > n) fail(Errc::SizeTooLarge, "sample larger than universe");
    std::vector<bool> taken(n, false);
    std::vector<u32> out;
    out.reserve(size);
    while (out.size() < size) {
        u64 v = rng.below(n);
        if (!taken[v]) {
            taken[v] = true;
            out.push_back(u32(v));
        }
    }
    return out;
}

}  // namespace m2sp
