#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpp/lattice.hpp"
#include "fpp/passage.hpp"

namespace fpp {

/// Exact reduced fraction with positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t num, std::int64_t den);

  std::string str() const;  // "p/q"
  double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& x, const Rational& y) noexcept {
    __extension__ using wide = __int128;
    return static_cast<wide>(x.num) * y.den <=> static_cast<wide>(y.num) * x.den;
  }
};

/// Derivative in passage-time units plus its value in units of (b - a).
struct DerivativeValue {
  Time raw = 0;
  Rational normalized;

  bool operator==(const DerivativeValue&) const = default;
};

DerivativeValue make_derivative(Time raw, Time gap);

/// Largest |S| any derivative routine accepts before refusing (2^|S| work).
inline constexpr std::size_t kOrderCap = 20;

/// Signed sum over all 2^|S| pinnings of S:
///   sum_theta (-1)^{#a(theta)} f(sigma_S^theta(env)).
DerivativeValue derivative_leibniz(const Lattice& lattice, const Environment& env,
                                   const EdgeSubset& s, std::size_t cap = kOrderCap);
DerivativeValue derivative_leibniz(PassageSolver& solver, const Environment& env,
                                   const EdgeSubset& s, std::size_t cap = kOrderCap);

enum class Peel { largest, smallest };

/// Recursive definition: d_S phi = d_{S \ j}(d_j phi), peeling j from S.
DerivativeValue derivative_recursive(const Lattice& lattice, const Environment& env,
                                     const EdgeSubset& s, Peel peel = Peel::largest,
                                     std::size_t cap = kOrderCap);
DerivativeValue derivative_recursive(PassageSolver& solver, const Environment& env,
                                     const EdgeSubset& s, Peel peel = Peel::largest,
                                     std::size_t cap = kOrderCap);

/// Applies d_{seq[0]} ... d_{seq[m-1]} to an arbitrary functional `phi`
/// (anything callable as Time(const Environment&)). Repeated edges are
/// allowed, which is how d_i d_i phi = 0 is exercised.
template <class Phi>
Time apply_derivatives(Phi&& phi, Environment& env, std::span<const EdgeId> seq) {
  if (seq.empty()) return phi(static_cast<const Environment&>(env));
  const EdgeId j = seq.back();
  const auto rest = seq.first(seq.size() - 1);
  const Level saved = env.level(j);
  env.set(j, Level::b);
  const Time high = apply_derivatives(phi, env, rest);
  env.set(j, Level::a);
  const Time low = apply_derivatives(phi, env, rest);
  env.set(j, saved);
  return high - low;
}

/// f on every assignment of the variable set V: entry `mask` is
/// f(sigma_V^theta(base)) with bit i = 1 meaning V[i] takes b.
struct HypercubeTable {
  Environment base;
  EdgeSubset vars;
  Time gap = 1;
  std::vector<Time> values;

  std::size_t size() const noexcept { return values.size(); }
  Environment environment(std::uint64_t mask) const;
  /// Mask of env restricted to the variable set.
  std::uint64_t mask_of(const Environment& env) const;
  /// Bits of the variables in S; throws unless S is inside V.
  std::uint64_t subset_mask(const EdgeSubset& s) const;
};

/// OpenMP build, one Dijkstra per mask.
HypercubeTable build_hypercube(const Lattice& lattice, const Environment& env,
                               const EdgeSubset& vars, std::size_t cap = kOrderCap);

/// Signed sum of `values` over the sub-cube spanned by `smask` at the
/// corner `base` (the base bits inside smask are ignored).
Time cube_difference(std::span<const Time> values, std::uint64_t smask, std::uint64_t base) noexcept;

DerivativeValue derivative_from_table(const HypercubeTable& table, const EdgeSubset& s,
                                      std::uint64_t base_mask);

namespace reference {

/// Serial hypercube build kept to check the parallel kernel.
HypercubeTable build_hypercube(const Lattice& lattice, const Environment& env,
                               const EdgeSubset& vars, std::size_t cap = kOrderCap);

}  // namespace reference

}  // namespace fpp
