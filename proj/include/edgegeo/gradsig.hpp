#pragma once

#include <cstdint>
#include <vector>

namespace edgegeo {

/// Record of every discrete decision a (sub)differentiable loss made:
/// bilinear cell indices, validity bits, residual signs, max arg indices,
/// clip signs, eigen-tie flags. A central-difference probe of one parameter
/// is trustworthy only if the two probe points produce identical records;
/// a difference means the secant crossed a kink and the probe is excluded.
///
/// Slots are preallocated and written by index so parallel kernels fill
/// them deterministically.
struct KinkSignature {
  std::vector<std::int32_t> slots;
  bool hard_exclude = false;  // e.g. eigenvalue tie at the probe point

  std::size_t add_block(std::size_t n) {
    const std::size_t off = slots.size();
    slots.resize(off + n, 0);
    return off;
  }
  void set(std::size_t i, std::int32_t v) { slots[i] = v; }

  /// True when an FD secant between the two probe points is kink-free.
  static bool comparable(const KinkSignature& a, const KinkSignature& b) {
    return !a.hard_exclude && !b.hard_exclude && a.slots == b.slots;
  }
};

inline std::int32_t sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace edgegeo
