#pragma once

#include <cmath>
#include <cstdint>

namespace ifslab {

// Identifies one reproducible substream: distinct stream_ids give
// statistically independent draws, identical (master_seed, stream_id,
// draw index) give bit-identical draws regardless of thread layout.
struct SeededStream {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based generator (splitmix64 over a per-stream key).
class RandomStream {
  public:
    explicit RandomStream(SeededStream s)
        : key_(detail::mix64(s.master_seed ^ detail::mix64(s.stream_id + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(key_ ^ counter_);
    }

    // uniform in [0, 1)
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace ifslab
