#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sw {

inline constexpr const char* kRngVersion = "philox4x32-10/box-muller v1";

/// Philox4x32-10 block function.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// Counter-based stream: key = seed, counter = (stream id, position). Two streams with
/// different ids never overlap, so the draw sequence does not depend on scheduling.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          id_(stream_id) {}

    std::uint64_t next_u64() {
        if (pos_ == 2) refill();
        const std::uint64_t v =
            (static_cast<std::uint64_t>(block_[2 * pos_]) << 32) | block_[2 * pos_ + 1];
        ++pos_;
        return v;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

    std::uint64_t id() const { return id_; }

private:
    void refill() {
        block_ = philox4x32({static_cast<std::uint32_t>(ctr_), static_cast<std::uint32_t>(ctr_ >> 32),
                             static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)},
                            key_);
        ++ctr_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t id_;
    std::uint64_t ctr_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 2;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Stable stream ids derived from a purpose tag and an index.
inline std::uint64_t stream_id(std::uint32_t tag, std::uint32_t index) {
    return (static_cast<std::uint64_t>(tag) << 32) | index;
}

namespace streams {
inline constexpr std::uint32_t xstar = 1;
inline constexpr std::uint32_t z = 2;
inline constexpr std::uint32_t hnoise = 3;
inline constexpr std::uint32_t z_cav = 4;
inline constexpr std::uint32_t chain = 16;
inline constexpr std::uint32_t init = 17;
inline constexpr std::uint32_t instance_seed = 32;
}  // namespace streams

/// The per-instance seed derived from a run seed and an instance index.
inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint32_t tag, std::uint32_t index) {
    Stream s(run_seed, stream_id(streams::instance_seed + tag, index));
    return s.next_u64();
}

}  // namespace sw
