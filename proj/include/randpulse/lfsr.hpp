// randpulse: Fibonacci LFSR with maximal-length default taps.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace randpulse {

/// Maximal-length tap positions (1-based, including the length itself) for
/// common register lengths. Primitive polynomials over GF(2).
inline std::vector<unsigned> maximal_taps(unsigned len) {
    switch (len) {
    case 2:  return {2, 1};
    case 3:  return {3, 2};
    case 4:  return {4, 3};
    case 5:  return {5, 3};
    case 6:  return {6, 5};
    case 7:  return {7, 6};
    case 8:  return {8, 6, 5, 4};
    case 9:  return {9, 5};
    case 10: return {10, 7};
    case 11: return {11, 9};
    case 12: return {12, 11, 10, 4};
    case 13: return {13, 12, 11, 8};
    case 14: return {14, 13, 12, 2};
    case 15: return {15, 14};
    case 16: return {16, 15, 13, 4};
    case 17: return {17, 14};
    case 18: return {18, 11};
    case 19: return {19, 18, 17, 14};
    case 20: return {20, 17};
    case 21: return {21, 19};
    case 22: return {22, 21};
    case 23: return {23, 18};
    case 24: return {24, 23, 22, 17};
    default: throw std::invalid_argument("maximal_taps: unsupported length");
    }
}

/// Fibonacci LFSR. Output bit is the LSB of the register; feedback is the
/// XOR of the tapped bits shifted in at the top. All-zeros state forbidden.
class Lfsr {
public:
    Lfsr(unsigned len, std::vector<unsigned> taps, std::uint32_t state)
        : len_(len), state_(state) {
        if (len < 2 || len > 24) throw std::invalid_argument("Lfsr: length in [2, 24]");
        if ((state & mask()) == 0) throw std::invalid_argument("Lfsr: all-zeros state");
        state_ &= mask();
        for (unsigned t : taps) {
            if (t == 0 || t > len) throw std::invalid_argument("Lfsr: tap out of range");
            // tap position t feeds back the bit emitted t steps from now,
            // which sits at distance len - t from the output end
            tap_mask_ |= std::uint32_t(1) << (len - t);
        }
        if (tap_mask_ == 0) throw std::invalid_argument("Lfsr: no taps");
    }

    Lfsr(unsigned len, std::uint32_t state = 1) : Lfsr(len, maximal_taps(len), state) {}

    /// Current output bit, then advance one step.
    bool step() {
        bool out = state_ & 1;
        bool fb = __builtin_popcount(state_ & tap_mask_) & 1;
        state_ >>= 1;
        if (fb) state_ |= std::uint32_t(1) << (len_ - 1);
        return out;
    }

    std::uint32_t state() const { return state_; }
    unsigned length() const { return len_; }
    std::uint32_t mask() const { return (std::uint32_t(1) << len_) - 1; }

private:
    unsigned len_;
    std::uint32_t state_;
    std::uint32_t tap_mask_ = 0;
};

} // namespace randpulse
