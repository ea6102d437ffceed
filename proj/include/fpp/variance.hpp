#pragma once

#include <cstdint>
#include <vector>

#include "fpp/derivative.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

/// Probability that an edge takes the low value a.
class BernoulliParam {
 public:
  explicit BernoulliParam(double p);
  double p() const noexcept { return p_; }
  double q() const noexcept { return 1.0 - p_; }

 private:
  double p_;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(long double x) noexcept;
  long double value() const noexcept { return sum_ + carry_; }

 private:
  long double sum_ = 0;
  long double carry_ = 0;
};

inline constexpr std::size_t kMomentEdgeCap = 20;
inline constexpr std::size_t kDecompositionEdgeCap = 20;
inline constexpr std::size_t kTalagrandEdgeCap = 14;

struct Moments {
  long double mean = 0;
  long double variance = 0;
};

/// Sums f(w) P(w) over every environment of the lattice.
Moments exact_moments(const Lattice& lattice, BernoulliParam p);
Moments exact_moments(const HypercubeTable& table, BernoulliParam p);

struct DecompositionReport {
  double p = 0;
  std::size_t edges = 0;
  long double variance = 0;
  std::vector<long double> term_sum;    // index s - 1: sum over |M| = s
  std::vector<long double> cumulative;  // running total of term_sum
  long double residual = 0;             // variance - cumulative.back()

  int max_size() const noexcept { return static_cast<int>(term_sum.size()); }
  /// |residual| / variance, or |residual| when the variance is zero.
  long double relative_residual() const noexcept;
};

/// E[d_M f] for every M, indexed by the bit mask of M over all edges.
/// In-place butterfly over the full table, one coordinate at a time.
std::vector<long double> expected_derivatives(const HypercubeTable& table, BernoulliParam p);

/// Variance split into (p(1-p))^|M| (E[d_M f])^2 terms grouped by |M| for
/// |M| = 1..max_size. Size cap 20 edges.
DecompositionReport decomposition(const Lattice& lattice, BernoulliParam p, int max_size);
DecompositionReport decomposition(const HypercubeTable& table, BernoulliParam p, int max_size);

struct TalagrandTerms {
  int k = 0;
  long double first_sum = 0;   // |M| < k
  long double second_sum = 0;  // |M| = k, reported with C = 1
  std::uint64_t nonzero_top = 0;  // sets of size k with a non-zero derivative
};

TalagrandTerms talagrand_terms(const Lattice& lattice, BernoulliParam p, int k);
TalagrandTerms talagrand_terms(const HypercubeTable& table, BernoulliParam p, int k);

struct MonteCarloEstimate {
  std::uint64_t samples = 0;
  long double mean = 0;
  long double variance = 0;        // unbiased
  long double standard_error = 0;  // of the variance estimate
};

/// Samples are drawn in fixed chunks of kMonteCarloChunk, each with its own
/// stream mix_seed(seed, chunk), so the result does not depend on the
/// number of workers.
inline constexpr std::uint64_t kMonteCarloChunk = 4096;
MonteCarloEstimate monte_carlo_variance(const Lattice& lattice, BernoulliParam p,
                                        std::uint64_t samples, std::uint64_t seed);

namespace reference {

/// E[d_M f] by a direct weighted sum over the corners outside M.
std::vector<long double> expected_derivatives(const HypercubeTable& table, BernoulliParam p);
DecompositionReport decomposition(const HypercubeTable& table, BernoulliParam p, int max_size);

}  // namespace reference

}  // namespace fpp
