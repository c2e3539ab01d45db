#pragma once

#include <cmath>
#include <cstdint>

namespace arpu {

// Counter-based splittable generator. Output i of a stream is a pure
// function of (key, i), so transcripts are bit-stable across platforms
// and thread schedules. No <random> engines anywhere: libstdc++ /
// libc++ distributions are not bit-compatible.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return mix(key_ ^ counter_);
    }

    // Child stream; independent of this stream's position.
    Rng split(std::uint64_t tag) const {
        return Rng(mix(key_ + 0x9e3779b97f4a7c15ULL * (tag + 1)));
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n > 0.
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection-free multiply-shift; bias < 2^-64, irrelevant here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    // Standard normal via Box-Muller (deterministic, no cached spare).
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stream tags for the per-consumer streams hanging off a master seed.
namespace stream {
inline constexpr std::uint64_t sampler = 1;
inline constexpr std::uint64_t oracle = 2;
inline constexpr std::uint64_t learner = 3;
inline constexpr std::uint64_t harness = 4;
}  // namespace stream

// Master seed plus the per-consumer stream derivation.
struct RunSeed {
    std::uint64_t master = 0;

    Rng stream_for(std::uint64_t consumer_tag, std::uint64_t trial = 0) const {
        return Rng(master).split(trial * 16 + consumer_tag);
    }
};

}  // namespace arpu
