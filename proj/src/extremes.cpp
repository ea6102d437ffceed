#include "fpp/extremes.hpp"

#include <algorithm>
#include <bit>
#include <random>

#include <omp.h>

#include "fpp/combinatorics.hpp"
#include "fpp/errors.hpp"
#include "fpp/parallel.hpp"
#include "fpp/passage.hpp"

namespace fpp {

const char* to_string(SearchMode mode) noexcept {
  switch (mode) {
    case SearchMode::exhaustive: return "exhaustive";
    case SearchMode::randomized: return "random";
    case SearchMode::lanes: return "lanes";
  }
  return "unknown";
}

std::int64_t envelope_bound(int k) {
  if (k < 1) fail(ErrorKind::invalid_input, "derivative order must be >= 1");
  if (k == 1) return 1;
  if (k - 2 >= 62) fail(ErrorKind::size_cap, "order too large for the envelope");
  return std::int64_t{1} << (k - 2);
}

std::string instance_key(const Lattice& lattice) {
  const LatticeSpec& s = lattice.spec();
  nlohmann::ordered_json j;
  j["dim"] = s.dim;
  j["radius"] = s.radius;
  if (s.reduced_box) {
    auto boxes = nlohmann::ordered_json::array();
    for (const auto& r : *s.reduced_box) boxes.push_back({r.lo, r.hi});
    j["reduced_box"] = boxes;
  }
  j["a"] = s.a;
  j["b"] = s.b;
  j["source"] = s.source;
  j["sink"] = s.sink;
  return j.dump();
}

namespace {

/// Lowest differing bit decides; the mask with a (0) there is smaller.
bool mask_lex_less(std::uint64_t x, std::uint64_t y) noexcept {
  const std::uint64_t diff = x ^ y;
  if (diff == 0) return false;
  return (x & (diff & (~diff + 1))) == 0;
}

/// Best (value, mask, S) seen so far for one objective. S holds edge
/// positions in increasing order.
struct Candidate {
  bool set = false;
  Time value = 0;
  std::uint64_t mask = 0;
  std::vector<std::uint32_t> s;
};

bool key_less(std::uint64_t mask, const std::vector<std::uint32_t>& s, const Candidate& c) {
  if (mask != c.mask) return mask_lex_less(mask, c.mask);
  return s < c.s;
}

bool improves(const Candidate& best, bool maximize, Time v, std::uint64_t mask,
              const std::vector<std::uint32_t>& s) {
  if (!best.set) return true;
  if (v != best.value) return maximize ? v > best.value : v < best.value;
  return key_less(mask, s, best);
}

void offer(Candidate& best, bool maximize, Time v, std::uint64_t mask,
           const std::vector<std::uint32_t>& s) {
  if (improves(best, maximize, v, mask, s)) best = Candidate{true, v, mask, s};
}

void merge(Candidate& into, bool maximize, const Candidate& other) {
  if (other.set) offer(into, maximize, other.value, other.mask, other.s);
}

std::uint64_t reverse_bits(std::uint64_t x) noexcept {
  x = ((x >> 1) & 0x5555555555555555ULL) | ((x & 0x5555555555555555ULL) << 1);
  x = ((x >> 2) & 0x3333333333333333ULL) | ((x & 0x3333333333333333ULL) << 2);
  x = ((x >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((x & 0x0F0F0F0F0F0F0F0FULL) << 4);
  x = ((x >> 8) & 0x00FF00FF00FF00FFULL) | ((x & 0x00FF00FF00FF00FFULL) << 8);
  x = ((x >> 16) & 0x0000FFFF0000FFFFULL) | ((x & 0x0000FFFF0000FFFFULL) << 16);
  return (x >> 32) | (x << 32);
}

/// Depth-first walk over S in increasing edge order. At depth t the
/// working array holds d_S f for every assignment of the remaining
/// |W| - t edges, so each node costs 2^{|W|-t}.
class CubeWalker {
 public:
  CubeWalker(int edges, int max_k)
      : edges_(edges), max_k_(max_k), buffers_(static_cast<std::size_t>(max_k) + 1),
        best_max_(static_cast<std::size_t>(max_k) + 1), best_min_(static_cast<std::size_t>(max_k) + 1) {
    for (int t = 1; t <= max_k; ++t) buffers_[t].resize(std::size_t{1} << (edges - t));
  }

  void walk_from(std::span<const Time> values, std::uint32_t first) {
    std::vector<std::uint32_t> rem;
    for (std::uint32_t p = 0; p < static_cast<std::uint32_t>(edges_); ++p) rem.push_back(p);
    chosen_.assign(1, first);
    differentiate(values, rem, first, buffers_[1]);
    rem.erase(rem.begin() + first);
    visit(1, rem);
  }

  Candidate& best(int k, bool maximize) {
    return maximize ? best_max_[static_cast<std::size_t>(k)] : best_min_[static_cast<std::size_t>(k)];
  }

 private:
  static void differentiate(std::span<const Time> cur, const std::vector<std::uint32_t>& rem,
                            std::size_t j, std::vector<Time>& out) {
    const std::size_t half = cur.size() / 2;
    const std::size_t low_mask = (std::size_t{1} << j) - 1;
    (void)rem;
    for (std::size_t idx = 0; idx < half; ++idx) {
      const std::size_t i0 = ((idx & ~low_mask) << 1) | (idx & low_mask);
      out[idx] = cur[i0 | (std::size_t{1} << j)] - cur[i0];
    }
  }

  void visit(int depth, const std::vector<std::uint32_t>& rem) {
    const std::vector<Time>& cur = buffers_[static_cast<std::size_t>(depth)];
    record(depth, cur, rem);
    if (depth == max_k_) return;
    for (std::size_t j = 0; j < rem.size(); ++j) {
      if (rem[j] < chosen_.back()) continue;
      differentiate(cur, rem, j, buffers_[static_cast<std::size_t>(depth) + 1]);
      std::vector<std::uint32_t> next = rem;
      next.erase(next.begin() + static_cast<std::ptrdiff_t>(j));
      chosen_.push_back(rem[j]);
      visit(depth + 1, next);
      chosen_.pop_back();
    }
  }

  void record(int depth, const std::vector<Time>& cur, const std::vector<std::uint32_t>& rem) {
    const auto [lo, hi] = std::minmax_element(cur.begin(), cur.end());
    consider(best(depth, true), true, *hi, cur, rem);
    consider(best(depth, false), false, *lo, cur, rem);
  }

  void consider(Candidate& best, bool maximize, Time v, const std::vector<Time>& cur,
                const std::vector<std::uint32_t>& rem) {
    if (best.set && (maximize ? v < best.value : v > best.value)) return;
    // Smallest tied index in edge-lexicographic order; deposit preserves it.
    std::uint64_t best_key = ~std::uint64_t{0};
    std::size_t best_idx = 0;
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
      if (cur[idx] != v) continue;
      const std::uint64_t key = reverse_bits(idx);
      if (key < best_key) {
        best_key = key;
        best_idx = idx;
      }
    }
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < rem.size(); ++i) {
      if (((best_idx >> i) & 1U) != 0) mask |= std::uint64_t{1} << rem[i];
    }
    offer(best, maximize, v, mask, chosen_);
  }

  int edges_;
  int max_k_;
  std::vector<std::vector<Time>> buffers_;
  std::vector<Candidate> best_max_;
  std::vector<Candidate> best_min_;
  std::vector<std::uint32_t> chosen_;
};

void check_exhaustive_caps(const Lattice& lattice, int max_k) {
  if (max_k < 1) fail(ErrorKind::invalid_input, "derivative order must be >= 1");
  if (lattice.edge_count() > kExhaustiveEdgeCap) {
    fail(ErrorKind::size_cap, "exhaustive search is capped at " +
                                  std::to_string(kExhaustiveEdgeCap) + " edges, lattice has " +
                                  std::to_string(lattice.edge_count()));
  }
  if (max_k > kExhaustiveOrderCap) {
    fail(ErrorKind::size_cap, "exhaustive search is capped at order " +
                                  std::to_string(kExhaustiveOrderCap));
  }
  if (static_cast<std::size_t>(max_k) > lattice.edge_count()) {
    fail(ErrorKind::invalid_input, "order exceeds the number of edges");
  }
}

HypercubeTable full_table(const Lattice& lattice) {
  std::vector<EdgeId> all(lattice.edge_count());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = EdgeId{i};
  return build_hypercube(lattice, Environment(lattice.edge_count()), EdgeSubset(std::move(all)),
                         kExhaustiveEdgeCap);
}

Witness witness_of(const HypercubeTable& table, const Candidate& c) {
  std::vector<EdgeId> s;
  for (auto p : c.s) s.push_back(EdgeId{p});
  return Witness{table.environment(c.mask), EdgeSubset(std::move(s))};
}

std::uint64_t scanned_count(std::size_t edges, int k) {
  const auto c = combinatorics::binom(static_cast<std::int64_t>(edges), k);
  return c.convert_to<std::uint64_t>() << (edges - static_cast<std::size_t>(k));
}

std::vector<ExtremeReport> finish_exhaustive(const Lattice& lattice, const HypercubeTable& table,
                                             int max_k, const std::vector<Candidate>& maxima,
                                             const std::vector<Candidate>& minima) {
  std::vector<ExtremeReport> reports;
  const std::string key = instance_key(lattice);
  for (int k = 1; k <= max_k; ++k) {
    const Candidate& hi = maxima[static_cast<std::size_t>(k)];
    const Candidate& lo = minima[static_cast<std::size_t>(k)];
    ExtremeReport r;
    r.k = k;
    r.mode = SearchMode::exhaustive;
    r.max_raw = hi.value;
    r.min_raw = lo.value;
    r.max = Rational::of(hi.value, lattice.gap());
    r.min = Rational::of(lo.value, lattice.gap());
    r.max_witness = witness_of(table, hi);
    r.min_witness = witness_of(table, lo);
    r.scanned = scanned_count(lattice.edge_count(), k);
    r.instance = key;
    if (k == 3) {
      r.audit.ran = true;
      r.audit.switches = audit_direction_switch(lattice, *r.min_witness);
    }
    check_envelope(r);
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace

std::vector<ExtremeReport> exhaustive_extremes_upto(const Lattice& lattice, int max_k) {
  check_exhaustive_caps(lattice, max_k);
  const HypercubeTable table = full_table(lattice);
  const int edges = static_cast<int>(lattice.edge_count());
  std::vector<Candidate> maxima(static_cast<std::size_t>(max_k) + 1);
  std::vector<Candidate> minima(static_cast<std::size_t>(max_k) + 1);

#pragma omp parallel num_threads(worker_count())
  {
    CubeWalker walker(edges, max_k);
#pragma omp for schedule(dynamic, 1)
    for (int first = 0; first < edges; ++first) {
      walker.walk_from(table.values, static_cast<std::uint32_t>(first));
    }
#pragma omp critical
    {
      for (int k = 1; k <= max_k; ++k) {
        merge(maxima[static_cast<std::size_t>(k)], true, walker.best(k, true));
        merge(minima[static_cast<std::size_t>(k)], false, walker.best(k, false));
      }
    }
  }
  return finish_exhaustive(lattice, table, max_k, maxima, minima);
}

ExtremeReport exhaustive_extremes(const Lattice& lattice, int k) {
  auto reports = exhaustive_extremes_upto(lattice, k);
  return std::move(reports.back());
}

namespace reference {

std::vector<ExtremeReport> exhaustive_extremes_upto(const Lattice& lattice, int max_k) {
  check_exhaustive_caps(lattice, max_k);
  std::vector<EdgeId> all(lattice.edge_count());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = EdgeId{i};
  const HypercubeTable table = fpp::reference::build_hypercube(
      lattice, Environment(lattice.edge_count()), EdgeSubset(std::move(all)), kExhaustiveEdgeCap);
  const auto edges = static_cast<std::uint32_t>(lattice.edge_count());
  std::vector<Candidate> maxima(static_cast<std::size_t>(max_k) + 1);
  std::vector<Candidate> minima(static_cast<std::size_t>(max_k) + 1);

  for (int k = 1; k <= max_k; ++k) {
    std::vector<std::uint32_t> s(static_cast<std::size_t>(k));
    for (std::uint32_t i = 0; i < s.size(); ++i) s[i] = i;
    while (true) {
      std::uint64_t smask = 0;
      for (auto p : s) smask |= std::uint64_t{1} << p;
      for (std::uint64_t base = 0; base < table.size(); ++base) {
        if ((base & smask) != 0) continue;
        const Time v = cube_difference(table.values, smask, base);
        offer(maxima[static_cast<std::size_t>(k)], true, v, base, s);
        offer(minima[static_cast<std::size_t>(k)], false, v, base, s);
      }
      // Next combination in lexicographic order.
      int i = k - 1;
      while (i >= 0 && s[static_cast<std::size_t>(i)] == edges - static_cast<std::uint32_t>(k - i)) --i;
      if (i < 0) break;
      ++s[static_cast<std::size_t>(i)];
      for (int t = i + 1; t < k; ++t) s[static_cast<std::size_t>(t)] = s[static_cast<std::size_t>(t) - 1] + 1;
    }
  }
  return finish_exhaustive(lattice, table, max_k, maxima, minima);
}

}  // namespace reference

namespace {

struct ClimbResult {
  Time value = 0;
  Environment env;
  EdgeSubset s;
};

bool climb_better(bool maximize, const ClimbResult& x, const ClimbResult& y) {
  if (x.value != y.value) return maximize ? x.value > y.value : x.value < y.value;
  if (x.env != y.env) return x.env.lex_less(y.env);
  return x.s < y.s;
}

EdgeId random_edge_outside(std::mt19937_64& rng, std::size_t edges, const std::vector<EdgeId>& s) {
  while (true) {
    const EdgeId e{static_cast<std::uint32_t>(rng() % edges)};
    if (std::find(s.begin(), s.end(), e) == s.end()) return e;
  }
}

ClimbResult climb(const Lattice& lattice, int k, std::uint64_t steps, std::uint64_t seed,
                  bool maximize, const Environment* start_env, const EdgeSubset* start_set) {
  std::mt19937_64 rng(seed);
  const std::size_t edges = lattice.edge_count();
  PassageSolver solver(lattice);

  Environment env(edges);
  if (start_env != nullptr) {
    env = *start_env;
  } else {
    for (std::uint32_t i = 0; i < edges; ++i) {
      if ((rng() & 1U) != 0) env.set(EdgeId{i}, Level::b);
    }
  }
  std::vector<EdgeId> s;
  if (start_set != nullptr) {
    s = start_set->edges();
  } else {
    while (s.size() < static_cast<std::size_t>(k)) s.push_back(random_edge_outside(rng, edges, s));
  }

  auto evaluate = [&](const Environment& w, const std::vector<EdgeId>& set) {
    return derivative_leibniz(solver, w, EdgeSubset(set)).raw;
  };
  Time value = evaluate(env, s);
  const bool can_move = edges > static_cast<std::size_t>(k);
  for (std::uint64_t step = 1; step < steps && can_move; ++step) {
    Environment next_env = env;
    std::vector<EdgeId> next_s = s;
    if ((rng() & 1U) != 0) {
      const EdgeId e = random_edge_outside(rng, edges, s);
      next_env.set(e, next_env.is_b(e) ? Level::a : Level::b);
    } else {
      const std::size_t slot = rng() % s.size();
      next_s[slot] = random_edge_outside(rng, edges, s);
    }
    const Time v = evaluate(next_env, next_s);
    if (maximize ? v > value : v < value) {
      value = v;
      env = std::move(next_env);
      s = std::move(next_s);
    }
  }
  ClimbResult out{value, std::move(env), EdgeSubset(std::move(s))};
  // Coordinates inside S do not affect the derivative; pin them to a.
  for (EdgeId e : out.s) out.env.set(e, Level::a);
  return out;
}

}  // namespace

ExtremeReport randomized_search(const Lattice& lattice, int k, std::uint64_t budget,
                                std::uint64_t seed, const RandomSearchOptions& options) {
  if (k < 1) fail(ErrorKind::invalid_input, "derivative order must be >= 1");
  if (static_cast<std::size_t>(k) > lattice.edge_count()) {
    fail(ErrorKind::invalid_input, "order exceeds the number of edges");
  }
  if (static_cast<std::size_t>(k) > kOrderCap) fail(ErrorKind::size_cap, "order exceeds the cap");
  if (budget == 0) fail(ErrorKind::invalid_input, "search budget must be positive");
  if (options.restarts < 1) fail(ErrorKind::invalid_input, "restarts must be positive");
  if (options.start_env) check_environment(lattice, *options.start_env);
  if (options.start_set) {
    check_edges(lattice, *options.start_set);
    if (options.start_set->size() != static_cast<std::size_t>(k)) {
      fail(ErrorKind::invalid_input, "starting edge set has the wrong order");
    }
  }

  const int restarts = options.restarts;
  const std::uint64_t steps = std::max<std::uint64_t>(1, budget / static_cast<std::uint64_t>(restarts));
  const int runs = 2 * restarts;
  std::vector<ClimbResult> results(static_cast<std::size_t>(runs));

#pragma omp parallel for num_threads(worker_count()) schedule(dynamic, 1)
  for (int run = 0; run < runs; ++run) {
    const bool maximize = run % 2 == 0;
    const int restart = run / 2;
    const Environment* start_env = restart == 0 && options.start_env ? &*options.start_env : nullptr;
    const EdgeSubset* start_set = restart == 0 && options.start_set ? &*options.start_set : nullptr;
    results[static_cast<std::size_t>(run)] =
        climb(lattice, k, steps, mix_seed(seed, static_cast<std::uint64_t>(run)), maximize,
              start_env, start_set);
  }

  const ClimbResult* hi = &results[0];
  const ClimbResult* lo = &results[1];
  for (int run = 2; run < runs; ++run) {
    const ClimbResult& r = results[static_cast<std::size_t>(run)];
    if (run % 2 == 0) {
      if (climb_better(true, r, *hi)) hi = &r;
    } else if (climb_better(false, r, *lo)) {
      lo = &r;
    }
  }

  ExtremeReport report;
  report.k = k;
  report.mode = SearchMode::randomized;
  report.max_raw = hi->value;
  report.min_raw = lo->value;
  report.max = Rational::of(hi->value, lattice.gap());
  report.min = Rational::of(lo->value, lattice.gap());
  report.max_witness = Witness{hi->env, hi->s};
  report.min_witness = Witness{lo->env, lo->s};
  report.scanned = steps * static_cast<std::uint64_t>(runs);
  report.instance = instance_key(lattice);
  if (k == 3) {
    report.audit.ran = true;
    report.audit.switches = audit_direction_switch(lattice, *report.min_witness);
  }
  check_envelope(report);
  return report;
}

ExtremeReport lanes_family_scan(int k, int max_beta) {
  if (k < 2) fail(ErrorKind::invalid_input, "lanes family needs k >= 2");
  if (max_beta < 0) fail(ErrorKind::invalid_input, "max_beta must be non-negative");
  ExtremeReport report;
  report.k = k;
  report.mode = SearchMode::lanes;
  bool first = true;
  for (int m1 = 0; m1 <= k; ++m1) {
    for (int beta1 = 0; beta1 <= max_beta; ++beta1) {
      for (int beta2 = 0; beta2 <= max_beta; ++beta2) {
        const LaneSpec spec = make_lane_spec(m1, k - m1, beta1, beta2);
        const std::int64_t d = lane_derivative_closed_form(spec);
        ++report.scanned;
        if (first || d > report.max_raw) {
          report.max_raw = d;
          report.max_lane = spec;
        }
        if (first || d < report.min_raw) {
          report.min_raw = d;
          report.min_lane = spec;
        }
        first = false;
      }
    }
  }
  report.max = Rational::of(report.max_raw, 1);
  report.min = Rational::of(report.min_raw, 1);
  check_envelope(report);
  return report;
}

bool check_fibonacci_recursion(const ExtremeReport& order_k, const ExtremeReport& next_order) {
  if (order_k.mode != SearchMode::exhaustive || next_order.mode != SearchMode::exhaustive) {
    fail(ErrorKind::invalid_input, "recursion check needs exhaustive reports");
  }
  if (order_k.instance != next_order.instance) {
    fail(ErrorKind::invalid_input, "recursion check needs reports from the same instance");
  }
  if (next_order.k != order_k.k + 1) {
    fail(ErrorKind::invalid_input, "recursion check needs consecutive orders");
  }
  // Same instance, same (b - a): raw values compare directly.
  return next_order.max_raw <= order_k.max_raw - order_k.min_raw &&
         next_order.min_raw >= order_k.min_raw - order_k.max_raw;
}

void check_envelope(const ExtremeReport& report) {
  const std::int64_t bound = envelope_bound(report.k);
  const Rational hi = Rational::of(bound, 1);
  const Rational lo = Rational::of(report.k == 1 ? 0 : -bound, 1);
  if (report.max > hi || report.min < lo || report.min > report.max) {
    fail(ErrorKind::claim_violation,
         "order-" + std::to_string(report.k) + " derivative range [" + report.min.str() + ", " +
             report.max.str() + "] leaves the envelope [" + lo.str() + ", " + hi.str() + "]");
  }
}

std::uint64_t audit_direction_switch(const Lattice& lattice, const Witness& witness) {
  if (witness.s.size() != 3) fail(ErrorKind::invalid_input, "direction-switch audit needs |S| = 3");
  PassageSolver solver(lattice);
  std::array<EdgeId, 3> roles{witness.s[0], witness.s[1], witness.s[2]};
  std::uint64_t switches = 0;
  Time derivative = 0;
  bool have_derivative = false;
  do {
    if (!detect_direction_switch(solver, witness.env, roles[0], roles[1], roles[2])) continue;
    ++switches;
    if (lattice.b() < 3 * lattice.a()) {
      fail(ErrorKind::claim_violation, "direction switch found with b < 3a");
    }
    if (!have_derivative) {
      derivative = derivative_leibniz(solver, witness.env, witness.s).raw;
      have_derivative = true;
    }
    if (derivative < 3 * lattice.a() - lattice.b()) {
      fail(ErrorKind::claim_violation, "direction switch with third derivative below 3a - b");
    }
  } while (std::next_permutation(roles.begin(), roles.end()));
  return switches;
}

}  // namespace fpp
