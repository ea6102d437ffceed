#include "fpp/derivative.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include <omp.h>

#include "fpp/errors.hpp"
#include "fpp/parallel.hpp"

namespace fpp {

Rational Rational::of(std::int64_t num, std::int64_t den) {
  if (den == 0) fail(ErrorKind::invalid_input, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

std::string Rational::str() const { return std::to_string(num) + "/" + std::to_string(den); }

DerivativeValue make_derivative(Time raw, Time gap) { return {raw, Rational::of(raw, gap)}; }

namespace {

void check_order(const EdgeSubset& s, std::size_t cap) {
  if (s.empty()) fail(ErrorKind::invalid_input, "derivative needs a non-empty edge set");
  if (s.size() > cap) {
    fail(ErrorKind::size_cap, "derivative order " + std::to_string(s.size()) +
                                  " exceeds the cap of " + std::to_string(cap));
  }
}

}  // namespace

DerivativeValue derivative_leibniz(PassageSolver& solver, const Environment& env,
                                   const EdgeSubset& s, std::size_t cap) {
  check_order(s, cap);
  const Lattice& g = solver.lattice();
  check_edges(g, s);
  check_environment(g, env);
  const std::size_t k = s.size();
  Environment w = env;
  Time sum = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i) w.set(s[i], ((mask >> i) & 1U) != 0 ? Level::b : Level::a);
    const Time f = solver.passage_time(w);
    const auto a_count = k - static_cast<std::size_t>(std::popcount(mask));
    sum += (a_count & 1U) != 0 ? -f : f;
  }
  return make_derivative(sum, g.gap());
}

DerivativeValue derivative_leibniz(const Lattice& lattice, const Environment& env,
                                   const EdgeSubset& s, std::size_t cap) {
  PassageSolver solver(lattice);
  return derivative_leibniz(solver, env, s, cap);
}

DerivativeValue derivative_recursive(PassageSolver& solver, const Environment& env,
                                     const EdgeSubset& s, Peel peel, std::size_t cap) {
  check_order(s, cap);
  const Lattice& g = solver.lattice();
  check_edges(g, s);
  check_environment(g, env);
  // apply_derivatives peels the last element of the sequence.
  std::vector<EdgeId> seq = s.edges();
  if (peel == Peel::smallest) std::reverse(seq.begin(), seq.end());
  Environment w = env;
  const Time raw = apply_derivatives(
      [&solver](const Environment& x) { return solver.passage_time(x); }, w, seq);
  return make_derivative(raw, g.gap());
}

DerivativeValue derivative_recursive(const Lattice& lattice, const Environment& env,
                                     const EdgeSubset& s, Peel peel, std::size_t cap) {
  PassageSolver solver(lattice);
  return derivative_recursive(solver, env, s, peel, cap);
}

Environment HypercubeTable::environment(std::uint64_t mask) const {
  Environment w = base;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    w.set(vars[i], ((mask >> i) & 1U) != 0 ? Level::b : Level::a);
  }
  return w;
}

std::uint64_t HypercubeTable::mask_of(const Environment& env) const {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (env.is_b(vars[i])) mask |= std::uint64_t{1} << i;
  }
  return mask;
}

std::uint64_t HypercubeTable::subset_mask(const EdgeSubset& s) const {
  std::uint64_t mask = 0;
  std::size_t pos = 0;
  for (EdgeId e : s) {
    while (pos < vars.size() && vars[pos] < e) ++pos;
    if (pos == vars.size() || vars[pos] != e) {
      fail(ErrorKind::invalid_input, "edge set is not inside the table's variable set");
    }
    mask |= std::uint64_t{1} << pos;
  }
  return mask;
}

namespace {

HypercubeTable prepare_table(const Lattice& lattice, const Environment& env,
                             const EdgeSubset& vars, std::size_t cap) {
  check_environment(lattice, env);
  check_edges(lattice, vars);
  if (vars.size() > cap) {
    fail(ErrorKind::size_cap, "hypercube over " + std::to_string(vars.size()) +
                                  " variables exceeds the cap of " + std::to_string(cap));
  }
  HypercubeTable t;
  t.base = env;
  t.vars = vars;
  t.gap = lattice.gap();
  t.values.assign(std::size_t{1} << vars.size(), 0);
  return t;
}

void assign_mask(Environment& w, const EdgeSubset& vars, std::uint64_t mask) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    w.set(vars[i], ((mask >> i) & 1U) != 0 ? Level::b : Level::a);
  }
}

}  // namespace

HypercubeTable build_hypercube(const Lattice& lattice, const Environment& env,
                               const EdgeSubset& vars, std::size_t cap) {
  HypercubeTable t = prepare_table(lattice, env, vars, cap);
  const auto n = static_cast<std::int64_t>(t.values.size());
#pragma omp parallel num_threads(worker_count())
  {
    PassageSolver solver(lattice);
    Environment w = env;
#pragma omp for schedule(static)
    for (std::int64_t mask = 0; mask < n; ++mask) {
      assign_mask(w, vars, static_cast<std::uint64_t>(mask));
      t.values[static_cast<std::size_t>(mask)] = solver.passage_time(w);
    }
  }
  return t;
}

namespace reference {

HypercubeTable build_hypercube(const Lattice& lattice, const Environment& env,
                               const EdgeSubset& vars, std::size_t cap) {
  HypercubeTable t = prepare_table(lattice, env, vars, cap);
  PassageSolver solver(lattice);
  Environment w = env;
  for (std::uint64_t mask = 0; mask < t.values.size(); ++mask) {
    assign_mask(w, vars, mask);
    t.values[mask] = solver.passage_time(w);
  }
  return t;
}

}  // namespace reference

Time cube_difference(std::span<const Time> values, std::uint64_t smask, std::uint64_t base) noexcept {
  const std::uint64_t corner = base & ~smask;
  const int k = std::popcount(smask);
  Time sum = 0;
  std::uint64_t sub = smask;
  while (true) {
    const Time v = values[corner | sub];
    sum += ((k - std::popcount(sub)) & 1) != 0 ? -v : v;
    if (sub == 0) break;
    sub = (sub - 1) & smask;
  }
  return sum;
}

DerivativeValue derivative_from_table(const HypercubeTable& table, const EdgeSubset& s,
                                      std::uint64_t base_mask) {
  check_order(s, kOrderCap);
  const std::uint64_t smask = table.subset_mask(s);
  if (base_mask >= table.size()) fail(ErrorKind::invalid_input, "base mask outside the table");
  return make_derivative(cube_difference(table.values, smask, base_mask), table.gap);
}

}  // namespace fpp
