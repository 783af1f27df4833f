// randpulse: simulation library for random flip-flops and random pulse trains.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace randpulse {

/// Mean pulse-train frequency in Hz. Strictly positive and finite.
struct RateHz {
    double value;

    explicit RateHz(double v) : value(v) {
        if (!(std::isfinite(v) && v > 0.0))
            throw std::invalid_argument("RateHz must be finite and > 0");
    }
};

enum class EntropyKind { seeded, os, forced, scripted };

/// Seedable uniform-bit supplier with independent child streams.
///
/// The default backend is xoshiro256++ seeded through splitmix64 over the
/// (seed, stream_id) pair. Child streams are derived by mixing, never by
/// splitting one sequence, so parallel trials stay independent of scheduling.
/// The `forced` and `scripted` kinds exist for degenerate-entropy regression
/// runs and exhaustive routing audits.
class EntropySource {
public:
    EntropySource(std::uint64_t seed, std::uint64_t stream_id = 0)
        : kind_(EntropyKind::seeded), seed_(seed), stream_(stream_id) {
        init_state(seed, stream_id);
    }

    static EntropySource from_os() {
        std::random_device rd;
        std::uint64_t s = (std::uint64_t(rd()) << 32) ^ rd();
        EntropySource src(s, 0);
        src.kind_ = EntropyKind::os;
        return src;
    }

    /// Every bit reads as `bit`; draws never exhaust.
    static EntropySource forced(bool bit) {
        EntropySource src(0, 0);
        src.kind_ = EntropyKind::forced;
        src.forced_bit_ = bit;
        return src;
    }

    /// Bits are served from `bits` in order; reading past the end throws.
    static EntropySource scripted(std::vector<bool> bits) {
        EntropySource src(0, 0);
        src.kind_ = EntropyKind::scripted;
        src.script_ = std::move(bits);
        return src;
    }

    EntropyKind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    /// Independent child stream labelled by `stream_id`.
    EntropySource fork(std::uint64_t stream_id) const {
        if (kind_ == EntropyKind::forced || kind_ == EntropyKind::scripted) {
            EntropySource child = *this;
            child.bits_consumed_ = 0;
            return child;
        }
        EntropySource child(seed_, mix(stream_, stream_id));
        child.kind_ = kind_;
        return child;
    }

    /// Child stream keyed by a string label (e.g. a component id).
    EntropySource fork(std::string_view label) const { return fork(fnv1a(label)); }

    std::uint64_t next_u64() {
        switch (kind_) {
        case EntropyKind::forced:
            bits_consumed_ += 64;
            return forced_bit_ ? ~std::uint64_t(0) : 0;
        case EntropyKind::scripted: {
            std::uint64_t v = 0;
            for (int i = 63; i >= 0; --i)
                if (next_bit()) v |= std::uint64_t(1) << i;
            return v;
        }
        default:
            bits_consumed_ += 64;
            bit_fill_ = 0;
            return next_raw();
        }
    }

    bool next_bit() {
        ++bits_consumed_;
        if (kind_ == EntropyKind::forced) return forced_bit_;
        if (kind_ == EntropyKind::scripted) {
            if (script_pos_ >= script_.size())
                throw std::runtime_error("scripted entropy exhausted");
            return script_[script_pos_++];
        }
        if (bit_fill_ == 0) {
            bit_buf_ = next_raw();
            bit_fill_ = 64;
        }
        bool b = (bit_buf_ >> 63) & 1;
        bit_buf_ <<= 1;
        --bit_fill_;
        return b;
    }

    /// Uniform on [0,1), 53-bit resolution.
    double next_uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) by rejection, exact.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_below(0)");
        std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do { v = next_u64(); } while (v >= lim && lim != 0);
        return v % n;
    }

    std::uint64_t bits_consumed() const { return bits_consumed_; }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
        return splitmix64(x);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    void init_state(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = mix(seed, stream);
        for (auto& v : s_) v = splitmix64(x);
        if (s_[0] == 0 && s_[1] == 0 && s_[2] == 0 && s_[3] == 0) s_[0] = 1;
    }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t next_raw() {
        std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    EntropyKind kind_;
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t s_[4] = {0, 0, 0, 0};
    std::uint64_t bit_buf_ = 0;
    int bit_fill_ = 0;
    std::uint64_t bits_consumed_ = 0;
    bool forced_bit_ = false;
    std::vector<bool> script_;
    std::size_t script_pos_ = 0;
};

/// Exponential waiting time, exact inverse CDF: -ln(1-u)/f.
inline double sample_exponential(EntropySource& src, RateHz f) {
    double u = src.next_uniform();
    return -std::log1p(-u) / f.value;
}

} // namespace randpulse
