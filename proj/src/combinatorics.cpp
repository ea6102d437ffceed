#include "fpp/combinatorics.hpp"

#include <algorithm>
#include <string>

#include "fpp/errors.hpp"

namespace fpp::combinatorics {

BigInt binom(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

BigInt alternating_tail_sum(std::int64_t lower, std::int64_t upper) {
  if (lower < 0 || lower > upper) {
    fail(ErrorKind::invalid_input, "alternating tail sum needs 0 <= A <= B");
  }
  BigInt sum = 0;
  for (std::int64_t k = lower; k <= upper; ++k) {
    if (k % 2 == 0) {
      sum += binom(upper, k);
    } else {
      sum -= binom(upper, k);
    }
  }
  return sum;
}

BigInt alternating_tail_sum_closed(std::int64_t lower, std::int64_t upper) {
  if (lower < 0 || lower > upper) {
    fail(ErrorKind::invalid_input, "alternating tail sum needs 0 <= A <= B");
  }
  // A = 0 is the full row (1 - 1)^B, which is 1 rather than 0 when B = 0.
  if (lower == 0) return upper == 0 ? 1 : 0;
  BigInt c = binom(upper - 1, lower - 1);
  return lower % 2 == 0 ? c : BigInt(-c);
}

VandermondeSides vandermonde(std::int64_t k, std::int64_t n, std::int64_t shift) {
  if (k < 0 || n < 0 || n + shift < 0 || n + shift > n + k) {
    fail(ErrorKind::invalid_input, "vandermonde needs n, k >= 0 and 0 <= n+A <= n+k");
  }
  VandermondeSides sides;
  const std::int64_t lo = std::max<std::int64_t>(0, shift);
  const std::int64_t hi = std::min(k, n + shift);
  for (std::int64_t i = lo; i <= hi; ++i) sides.sum += binom(k, i) * binom(n, n + shift - i);
  sides.closed = binom(n + k, n + shift);
  return sides;
}

IdentityCheck check_alternating_tail(std::int64_t max_b) {
  IdentityCheck c;
  for (std::int64_t b = 0; b <= max_b; ++b) {
    // Running tail from the top avoids re-summing each (A, B) from scratch.
    BigInt tail = 0;
    for (std::int64_t a = b; a >= 0; --a) {
      if (a % 2 == 0) {
        tail += binom(b, a);
      } else {
        tail -= binom(b, a);
      }
      ++c.cases;
      if (tail != alternating_tail_sum_closed(a, b)) ++c.failures;
    }
  }
  return c;
}

IdentityCheck check_vandermonde(std::int64_t max_total) {
  IdentityCheck c;
  for (std::int64_t total = 0; total <= max_total; ++total) {
    for (std::int64_t k = 0; k <= total; ++k) {
      const std::int64_t n = total - k;
      for (std::int64_t shift = -n; shift <= k; ++shift) {
        const VandermondeSides s = vandermonde(k, n, shift);
        ++c.cases;
        if (s.sum != s.closed) ++c.failures;
      }
    }
  }
  return c;
}

}  // namespace fpp::combinatorics
