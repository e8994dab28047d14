#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hgnas {

// Arbitrary-precision unsigned integer, just large enough for design-space
// cardinalities (38^N style numbers overflow uint64 past N=12).
class BigUint {
 public:
  BigUint() : limbs_{0} {}
  BigUint(std::uint64_t v);  // NOLINT(google-explicit-constructor)

  BigUint& operator+=(const BigUint& other);
  BigUint& operator*=(const BigUint& other);
  friend BigUint operator+(BigUint a, const BigUint& b) { return a += b; }
  friend BigUint operator*(BigUint a, const BigUint& b) { return a *= b; }

  static BigUint pow(const BigUint& base, unsigned exp);

  // Subtraction requires a >= b (used only by inclusion-exclusion sums that
  // are provably non-negative); throws std::underflow_error otherwise.
  BigUint& operator-=(const BigUint& other);
  friend BigUint operator-(BigUint a, const BigUint& b) { return a -= b; }

  bool operator==(const BigUint& other) const { return limbs_ == other.limbs_; }
  bool operator!=(const BigUint& other) const { return !(*this == other); }
  bool operator<(const BigUint& other) const;
  bool operator<=(const BigUint& other) const { return *this < other || *this == other; }

  bool fits_u64() const { return limbs_.size() <= 2; }
  std::uint64_t to_u64() const;  // throws std::overflow_error if too large
  std::string to_string() const;
  double to_double() const;

 private:
  // base 2^32 little-endian, no leading zero limbs (except the value 0)
  std::vector<std::uint32_t> limbs_;
  void trim();
};

}  // namespace hgnas
