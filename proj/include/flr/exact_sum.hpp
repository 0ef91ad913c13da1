#ifndef FLR_EXACT_SUM_HPP
#define FLR_EXACT_SUM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "flr/common.hpp"

namespace flr {

/// Fixed-point (Kulisch-style) accumulator for doubles. Every finite addend
/// is folded in exactly, so the final value depends only on the multiset of
/// addends -- reordering the inputs cannot change a single bit of value().
/// The whole double range, subnormals included, fits in the limb window.
class ExactAccumulator {
 public:
  ExactAccumulator() { limbs_.fill(0); }

  void reset() {
    limbs_.fill(0);
    pending_ = 0;
    nonfinite_ = 0.0;
    has_nonfinite_ = false;
  }

  void add(double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    const std::uint64_t expfield = (bits >> 52) & 0x7FFULL;
    std::uint64_t mant = bits & 0xFFFFFFFFFFFFFULL;
    if (expfield == 0x7FFULL) {  // inf or nan
      nonfinite_ += x;
      has_nonfinite_ = true;
      return;
    }
    int pos;  // bit position of the mantissa LSB, biased so pos >= 0
    if (expfield == 0) {
      if (mant == 0) return;  // +-0
      pos = 0;                // subnormal: value = mant * 2^-1074
    } else {
      mant |= 1ULL << 52;
      pos = static_cast<int>(expfield) - 1;  // e2 + 1074 with e2 = exp - 1075
    }
    const bool negative = (bits >> 63) != 0;
    const int q = pos >> 5;
    const int r = pos & 31;
    const std::uint64_t lo = (mant & 0xFFFFFFFFULL) << r;  // < 2^63
    const std::uint64_t hi = (mant >> 32) << r;            // < 2^53
    std::int64_t p0 = static_cast<std::int64_t>(lo & 0xFFFFFFFFULL);
    std::int64_t p1 = static_cast<std::int64_t>((lo >> 32) + (hi & 0xFFFFFFFFULL));
    std::int64_t p2 = static_cast<std::int64_t>(hi >> 32);
    if (negative) {
      p0 = -p0;
      p1 = -p1;
      p2 = -p2;
    }
    limbs_[q] += p0;
    limbs_[q + 1] += p1;
    limbs_[q + 2] += p2;
    if (++pending_ >= kMaxPending) carry_normalize();
  }

  void add_product(double a, double b) { add(a * b); }

  /// Deterministic conversion of the exact fixed-point sum to double
  /// (error below 2 ulp, independent of insertion order).
  double value() const {
    if (has_nonfinite_) return nonfinite_;
    std::array<std::int64_t, kLimbs> limbs = limbs_;
    propagate(limbs);
    // Locate the top nonzero limb to determine the overall sign.
    int top = kLimbs - 1;
    while (top >= 0 && limbs[top] == 0) --top;
    if (top < 0) return 0.0;
    double sign = 1.0;
    if (limbs[top] < 0) {
      sign = -1.0;
      for (auto& l : limbs) l = -l;
      propagate(limbs);
      top = kLimbs - 1;
      while (top >= 0 && limbs[top] == 0) --top;
    }
    double result = 0.0;
    for (int i = top; i >= 0; --i) {
      result += std::ldexp(static_cast<double>(limbs[i]), 32 * i - kBias);
    }
    return sign * result;
  }

 private:
  // 2046 bit positions + 2 piece limbs + carry headroom.
  static constexpr int kLimbs = 67;
  static constexpr int kBias = 1074;
  // Each add changes a limb by < 2^33, so 2^29 adds stay clear of int64 overflow.
  static constexpr std::uint32_t kMaxPending = 1u << 29;

  static void propagate(std::array<std::int64_t, kLimbs>& limbs) {
    for (int i = 0; i + 1 < kLimbs; ++i) {
      const std::int64_t carry = limbs[i] >> 32;  // floored shift
      limbs[i] -= carry << 32;
      limbs[i + 1] += carry;
    }
  }

  void carry_normalize() {
    propagate(limbs_);
    pending_ = 0;
  }

  std::array<std::int64_t, kLimbs> limbs_;
  std::uint32_t pending_ = 0;
  double nonfinite_ = 0.0;
  bool has_nonfinite_ = false;
};

}  // namespace flr

#endif  // FLR_EXACT_SUM_HPP
