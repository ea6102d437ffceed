#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace fpp::combinatorics {

using BigInt = boost::multiprecision::cpp_int;

/// Exact binomial coefficient; 0 when k < 0, k > n or n < 0.
BigInt binom(std::int64_t n, std::int64_t k);

/// sum_{k=A}^{B} (-1)^k binom(B, k) by direct summation. Requires 0 <= A <= B.
BigInt alternating_tail_sum(std::int64_t lower, std::int64_t upper);
/// Closed form of the same sum: (1 - 1)^B for A = 0 (so 0 unless B = 0),
/// else (-1)^A binom(B-1, A-1).
BigInt alternating_tail_sum_closed(std::int64_t lower, std::int64_t upper);

struct VandermondeSides {
  BigInt sum;     // sum_{i=max(0,A)}^{min(k,n+A)} binom(k,i) binom(n,n+A-i)
  BigInt closed;  // binom(n+k, n+A)
};

/// Both sides of the committee-counting identity. Requires n, k >= 0 and
/// 0 <= n+A <= n+k.
VandermondeSides vandermonde(std::int64_t k, std::int64_t n, std::int64_t shift);

struct IdentityCheck {
  std::int64_t cases = 0;
  std::int64_t failures = 0;
  bool ok() const noexcept { return failures == 0; }
};

/// Every (A, B) with 0 <= A <= B <= max_b.
IdentityCheck check_alternating_tail(std::int64_t max_b);
/// Every (k, n, A) with n + k <= max_total and 0 <= n+A <= n+k.
IdentityCheck check_vandermonde(std::int64_t max_total);

}  // namespace fpp::combinatorics
