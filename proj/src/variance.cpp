#include "fpp/variance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include <omp.h>

#include "fpp/errors.hpp"
#include "fpp/parallel.hpp"
#include "fpp/passage.hpp"

namespace fpp {

BernoulliParam::BernoulliParam(double p) : p_(p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::invalid_input, "p must lie strictly between 0 and 1");
}

void CompensatedSum::add(long double x) noexcept {
  const long double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

long double DecompositionReport::relative_residual() const noexcept {
  const long double r = std::fabs(residual);
  return variance > 0 ? r / variance : r;
}

namespace {

constexpr std::size_t kChunk = 4096;

/// P(w) = p^{#a} q^{#b} over `width` coordinates.
class MaskWeights {
 public:
  MaskWeights(BernoulliParam p, std::size_t width) : width_(width) {
    pw_.resize(width + 1);
    qw_.resize(width + 1);
    pw_[0] = qw_[0] = 1;
    for (std::size_t i = 1; i <= width; ++i) {
      pw_[i] = pw_[i - 1] * static_cast<long double>(p.p());
      qw_[i] = qw_[i - 1] * static_cast<long double>(p.q());
    }
  }

  /// Weight of `mask` restricted to `free_bits` coordinates.
  long double operator()(std::uint64_t mask, std::size_t free_bits) const noexcept {
    const auto b = static_cast<std::size_t>(std::popcount(mask));
    return pw_[free_bits - b] * qw_[b];
  }
  long double operator()(std::uint64_t mask) const noexcept { return (*this)(mask, width_); }

 private:
  std::size_t width_;
  std::vector<long double> pw_;
  std::vector<long double> qw_;
};

HypercubeTable full_table(const Lattice& lattice, std::size_t cap) {
  if (lattice.edge_count() > cap) {
    fail(ErrorKind::size_cap, "exact enumeration is capped at " + std::to_string(cap) +
                                  " edges, lattice has " + std::to_string(lattice.edge_count()));
  }
  std::vector<EdgeId> all(lattice.edge_count());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = EdgeId{i};
  return build_hypercube(lattice, Environment(lattice.edge_count()), EdgeSubset(std::move(all)), cap);
}

void check_table(const HypercubeTable& table, std::size_t cap) {
  if (table.vars.size() > cap) {
    fail(ErrorKind::size_cap, "table over " + std::to_string(table.vars.size()) +
                                  " variables exceeds the cap of " + std::to_string(cap));
  }
}

std::vector<long double> size_weights(BernoulliParam p, std::size_t width) {
  std::vector<long double> w(width + 1);
  const long double pq = static_cast<long double>(p.p()) * static_cast<long double>(p.q());
  w[0] = 1;
  for (std::size_t s = 1; s <= width; ++s) w[s] = w[s - 1] * pq;
  return w;
}

/// Per-size sums of (p q)^|M| e[M]^2 for 1 <= |M| <= max_size. Fixed chunks
/// combined in order keep the result independent of the worker count.
std::vector<long double> grouped_terms(const std::vector<long double>& e, BernoulliParam p,
                                       std::size_t width, int max_size) {
  const auto weights = size_weights(p, width);
  const std::size_t chunks = (e.size() + kChunk - 1) / kChunk;
  const auto sizes = static_cast<std::size_t>(max_size);
  std::vector<long double> partial(chunks * sizes, 0);
#pragma omp parallel for num_threads(worker_count()) schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    std::vector<CompensatedSum> acc(sizes);
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(e.size(), lo + kChunk);
    for (std::size_t m = lo; m < hi; ++m) {
      const auto s = static_cast<std::size_t>(std::popcount(m));
      if (s == 0 || s > sizes) continue;
      acc[s - 1].add(weights[s] * e[m] * e[m]);
    }
    for (std::size_t s = 0; s < sizes; ++s) partial[static_cast<std::size_t>(c) * sizes + s] = acc[s].value();
  }
  std::vector<long double> out(sizes);
  for (std::size_t s = 0; s < sizes; ++s) {
    CompensatedSum acc;
    for (std::size_t c = 0; c < chunks; ++c) acc.add(partial[c * sizes + s]);
    out[s] = acc.value();
  }
  return out;
}

DecompositionReport make_report(const HypercubeTable& table, BernoulliParam p,
                                std::vector<long double> term_sum) {
  DecompositionReport r;
  r.p = p.p();
  r.edges = table.vars.size();
  r.variance = exact_moments(table, p).variance;
  r.term_sum = std::move(term_sum);
  CompensatedSum running;
  for (long double t : r.term_sum) {
    running.add(t);
    r.cumulative.push_back(running.value());
  }
  r.residual = r.variance - (r.cumulative.empty() ? 0 : r.cumulative.back());
  return r;
}

void check_max_size(int max_size, std::size_t width) {
  if (max_size < 1 || static_cast<std::size_t>(max_size) > width) {
    fail(ErrorKind::invalid_input, "max size must lie in [1, " + std::to_string(width) + "]");
  }
}

}  // namespace

Moments exact_moments(const HypercubeTable& table, BernoulliParam p) {
  check_table(table, kMomentEdgeCap);
  const MaskWeights weight(p, table.vars.size());
  CompensatedSum mean;
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    mean.add(weight(m) * static_cast<long double>(table.values[m]));
  }
  const long double mu = mean.value();
  CompensatedSum var;
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    const long double d = static_cast<long double>(table.values[m]) - mu;
    var.add(weight(m) * d * d);
  }
  return {mu, var.value()};
}

Moments exact_moments(const Lattice& lattice, BernoulliParam p) {
  return exact_moments(full_table(lattice, kMomentEdgeCap), p);
}

std::vector<long double> expected_derivatives(const HypercubeTable& table, BernoulliParam p) {
  check_table(table, kDecompositionEdgeCap);
  std::vector<long double> v(table.values.begin(), table.values.end());
  const auto pa = static_cast<long double>(p.p());
  const auto pb = static_cast<long double>(p.q());
  const auto half = static_cast<std::int64_t>(v.size() / 2);
  const int threads = worker_count();
  for (std::size_t i = 0; i < table.vars.size(); ++i) {
    const std::size_t bit = std::size_t{1} << i;
    const std::size_t low = bit - 1;
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::int64_t t = 0; t < half; ++t) {
      const auto idx = static_cast<std::size_t>(t);
      const std::size_t i0 = ((idx & ~low) << 1) | (idx & low);
      const long double x = v[i0];
      const long double y = v[i0 | bit];
      v[i0] = pa * x + pb * y;
      v[i0 | bit] = y - x;
    }
  }
  return v;
}

DecompositionReport decomposition(const HypercubeTable& table, BernoulliParam p, int max_size) {
  check_table(table, kDecompositionEdgeCap);
  check_max_size(max_size, table.vars.size());
  const auto e = expected_derivatives(table, p);
  return make_report(table, p, grouped_terms(e, p, table.vars.size(), max_size));
}

DecompositionReport decomposition(const Lattice& lattice, BernoulliParam p, int max_size) {
  check_max_size(max_size, lattice.edge_count());
  return decomposition(full_table(lattice, kDecompositionEdgeCap), p, max_size);
}

TalagrandTerms talagrand_terms(const HypercubeTable& table, BernoulliParam p, int k) {
  check_table(table, kTalagrandEdgeCap);
  const std::size_t width = table.vars.size();
  if (k < 1 || static_cast<std::size_t>(k) > width + 1) {
    fail(ErrorKind::invalid_input, "k must lie in [1, " + std::to_string(width + 1) + "]");
  }
  TalagrandTerms out;
  out.k = k;
  if (k > 1) {
    const auto e = expected_derivatives(table, p);
    CompensatedSum first;
    for (long double t : grouped_terms(e, p, width, k - 1)) first.add(t);
    out.first_sum = first.value();
  }
  if (static_cast<std::size_t>(k) > width) return out;

  // Norms of d_M f for every |M| = k, from exact integer differences.
  const MaskWeights weight(p, width);
  const std::uint64_t full = table.size() - 1;
  const std::size_t free_bits = width - static_cast<std::size_t>(k);
  std::vector<long double> contrib(table.size(), 0);
  std::vector<std::uint8_t> nonzero(table.size(), 0);
#pragma omp parallel for num_threads(worker_count()) schedule(dynamic, 64)
  for (std::int64_t mi = 0; mi < static_cast<std::int64_t>(table.size()); ++mi) {
    const auto m = static_cast<std::uint64_t>(mi);
    if (std::popcount(m) != k) continue;
    const std::uint64_t comp = full & ~m;
    CompensatedSum l1;
    CompensatedSum l2;
    std::uint64_t base = 0;
    while (true) {
      const auto g = static_cast<long double>(cube_difference(table.values, m, base));
      const long double w = weight(base, free_bits);
      l1.add(w * std::fabs(g));
      l2.add(w * g * g);
      if (base == comp) break;
      base = (base - comp) & comp;
    }
    const long double n1 = l1.value();
    if (n1 <= 0) continue;
    const long double n2sq = l2.value();
    const long double ratio = std::max<long double>(1, std::sqrt(n2sq) / n1);
    contrib[m] = n2sq / (1 + std::pow(std::log(ratio), static_cast<long double>(k)));
    nonzero[m] = 1;
  }
  CompensatedSum second;
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    if (nonzero[m] == 0) continue;
    second.add(contrib[m]);
    ++out.nonzero_top;
  }
  out.second_sum = second.value();
  return out;
}

TalagrandTerms talagrand_terms(const Lattice& lattice, BernoulliParam p, int k) {
  return talagrand_terms(full_table(lattice, kTalagrandEdgeCap), p, k);
}

MonteCarloEstimate monte_carlo_variance(const Lattice& lattice, BernoulliParam p,
                                        std::uint64_t samples, std::uint64_t seed) {
  if (samples < 2) fail(ErrorKind::invalid_input, "Monte Carlo needs at least 2 samples");
  const std::size_t edges = lattice.edge_count();
  const std::uint64_t chunks = (samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<Time> f(samples);
#pragma omp parallel num_threads(worker_count())
  {
    PassageSolver solver(lattice);
    Environment w(edges);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
      std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
      const std::uint64_t lo = static_cast<std::uint64_t>(c) * kMonteCarloChunk;
      const std::uint64_t hi = std::min(samples, lo + kMonteCarloChunk);
      for (std::uint64_t s = lo; s < hi; ++s) {
        for (std::uint32_t j = 0; j < edges; ++j) {
          w.set(EdgeId{j}, unit_interval(rng()) < p.p() ? Level::a : Level::b);
        }
        f[s] = solver.passage_time(w);
      }
    }
  }

  const auto n = static_cast<long double>(samples);
  CompensatedSum sum;
  for (Time x : f) sum.add(static_cast<long double>(x));
  const long double mean = sum.value() / n;
  CompensatedSum m2;
  CompensatedSum m4;
  for (Time x : f) {
    const long double d = static_cast<long double>(x) - mean;
    m2.add(d * d);
    m4.add(d * d * d * d);
  }
  MonteCarloEstimate out;
  out.samples = samples;
  out.mean = mean;
  out.variance = m2.value() / (n - 1);
  const long double s2 = out.variance;
  const long double fourth = m4.value() / n;
  const long double v = (fourth - (n - 3) / (n - 1) * s2 * s2) / n;
  out.standard_error = std::sqrt(std::max<long double>(0, v));
  return out;
}

namespace reference {

std::vector<long double> expected_derivatives(const HypercubeTable& table, BernoulliParam p) {
  check_table(table, kDecompositionEdgeCap);
  const std::size_t width = table.vars.size();
  const MaskWeights weight(p, width);
  const std::uint64_t full = table.size() - 1;
  std::vector<long double> e(table.size(), 0);
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    const std::uint64_t comp = full & ~m;
    const std::size_t free_bits = width - static_cast<std::size_t>(std::popcount(m));
    CompensatedSum acc;
    std::uint64_t base = 0;
    while (true) {
      acc.add(weight(base, free_bits) * static_cast<long double>(cube_difference(table.values, m, base)));
      if (base == comp) break;
      base = (base - comp) & comp;
    }
    e[m] = acc.value();
  }
  return e;
}

DecompositionReport decomposition(const HypercubeTable& table, BernoulliParam p, int max_size) {
  check_table(table, kDecompositionEdgeCap);
  check_max_size(max_size, table.vars.size());
  const auto e = reference::expected_derivatives(table, p);
  const auto weights = size_weights(p, table.vars.size());
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(max_size));
  for (std::uint64_t m = 1; m < e.size(); ++m) {
    const auto s = static_cast<std::size_t>(std::popcount(m));
    if (s > acc.size()) continue;
    acc[s - 1].add(weights[s] * e[m] * e[m]);
  }
  std::vector<long double> terms;
  for (const auto& a : acc) terms.push_back(a.value());
  return make_report(table, p, std::move(terms));
}

}  // namespace reference

}  // namespace fpp
