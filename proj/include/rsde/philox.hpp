#pragma once

#include <array>
#include <cstdint>
#include <cmath>

namespace rsde {

// Philox-4x32-10 counter-based generator. A draw is a pure function of
// (key, counter), so ensembles can be evaluated in any order, on any number
// of threads, and still reproduce bit-for-bit.
struct Philox4x32 {
    using ctr_t = std::array<std::uint32_t, 4>;
    using key_t = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static inline ctr_t round(ctr_t c, key_t k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    static inline ctr_t generate(ctr_t c, key_t k) {
        c = round(c, k);
        for (int i = 1; i < 10; ++i) {
            k[0] += W0;
            k[1] += W1;
            c = round(c, k);
        }
        return c;
    }
};

// Stream tags keep unrelated random uses (noise draws, Wiener increments,
// permutation shuffles, ...) on disjoint counter spaces.
enum class RngStream : std::uint32_t {
    noise = 1,
    wiener = 2,
    permutation = 3,
    test = 15,
};

// One 128-bit block of randomness addressed by (seed; stream, replica, lane, index).
// `lane` is a small per-use channel (e.g. a vector component), `index` the
// running counter within the stream, `replica` the Monte Carlo sample id.
inline Philox4x32::ctr_t rng_block(std::uint64_t seed, RngStream stream,
                                   std::uint32_t replica, std::uint32_t lane,
                                   std::uint32_t index) {
    const Philox4x32::key_t key = {static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
    const Philox4x32::ctr_t ctr = {
        index, replica, (static_cast<std::uint32_t>(stream) << 24) | (lane & 0xFFFFFFu), 0u};
    return Philox4x32::generate(ctr, key);
}

// Uniform in [0,1) with 53 random bits from two 32-bit words.
inline double u01(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Box-Muller pair from one 128-bit block; u1 is kept strictly positive.
inline std::array<double, 2> normal_pair(const Philox4x32::ctr_t& blk) {
    const double u1 = 1.0 - u01(blk[0], blk[1]); // (0, 1]
    const double u2 = u01(blk[2], blk[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

// Standard normal indexed by (seed, stream, replica, lane, j). Consecutive j
// share a Philox block pairwise, so bulk generation wastes nothing.
inline double normal_at(std::uint64_t seed, RngStream stream, std::uint32_t replica,
                        std::uint32_t lane, std::uint32_t j) {
    const auto blk = rng_block(seed, stream, replica, lane, j / 2);
    return normal_pair(blk)[j % 2];
}

} // namespace rsde
