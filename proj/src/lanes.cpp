#include "fpp/lanes.hpp"

#include <algorithm>
#include <string>

#include <omp.h>

#include "fpp/combinatorics.hpp"
#include "fpp/errors.hpp"
#include "fpp/parallel.hpp"
#include "fpp/passage.hpp"

namespace fpp {

namespace {

using combinatorics::BigInt;
using combinatorics::binom;

constexpr int kBruteForceCap = 24;
constexpr int kEmbedCap = 10;

void validate_counts(const LaneSpec& s) {
  if (s.m1 < 0 || s.m2 < 0 || s.beta1 < 0 || s.beta2 < 0) {
    fail(ErrorKind::invalid_input, "lane counts must be non-negative");
  }
  if (s.m1 + s.m2 < 2) fail(ErrorKind::invalid_input, "lanes need m1 + m2 >= 2");
}

std::int64_t to_int64(const BigInt& v) {
  if (v > BigInt(INT64_MAX) || v < BigInt(INT64_MIN)) {
    fail(ErrorKind::size_cap, "lane derivative does not fit in 64 bits");
  }
  return v.convert_to<std::int64_t>();
}

}  // namespace

LaneSpec make_lane_spec(int m1, int m2, int beta1, int beta2) {
  LaneSpec s{m1, m2, beta1, beta2, std::max(m1 + beta1, m2 + beta2)};
  validate_counts(s);
  return s;
}

void validate(const LaneSpec& s) {
  validate_counts(s);
  if (s.lane_length < std::max(s.m1 + s.beta1, s.m2 + s.beta2)) {
    fail(ErrorKind::invalid_input, "lane length is too short for the C and B groups");
  }
}

Time lane_passage_time(const LaneSpec& s, Time a, Time b, int i1, int i2) {
  validate(s);
  if (i1 < 0 || i1 > s.m1 || i2 < 0 || i2 > s.m2) {
    fail(ErrorKind::invalid_input, "lane pinning counts out of range");
  }
  return static_cast<Time>(s.lane_length) * a + (b - a) * std::min(i1 + s.beta1, i2 + s.beta2);
}

std::int64_t lane_derivative_bruteforce(const LaneSpec& s) {
  validate_counts(s);
  if (s.m1 + s.m2 > kBruteForceCap) {
    fail(ErrorKind::size_cap, "brute-force lane derivative is capped at m1 + m2 <= 24");
  }
  BigInt sum = 0;
  for (int i1 = 0; i1 <= s.m1; ++i1) {
    for (int i2 = 0; i2 <= s.m2; ++i2) {
      const BigInt term = binom(s.m1, i1) * binom(s.m2, i2) * std::min(i1 + s.beta1, i2 + s.beta2);
      if (((s.m1 - i1) + (s.m2 - i2)) % 2 == 0) {
        sum += term;
      } else {
        sum -= term;
      }
    }
  }
  return to_int64(sum);
}

std::int64_t lane_derivative_closed_form(const LaneSpec& s) {
  validate_counts(s);
  if (s.beta1 - s.beta2 >= s.m2 || s.beta2 - s.beta1 >= s.m1) return 0;
  const BigInt c = binom(s.m1 + s.m2 - 2, s.m1 + s.beta1 - s.beta2 - 1);
  const bool negative = (s.m1 + s.m2 + s.beta1 + s.beta2) % 2 != 0;
  return to_int64(negative ? BigInt(-c) : c);
}

LaneEmbedding place_lanes(const LaneSpec& spec, const EmbedOptions& options) {
  validate_counts(spec);
  if (spec.m1 + spec.m2 > kEmbedCap) {
    fail(ErrorKind::size_cap, "lane embedding is capped at m1 + m2 <= 10");
  }
  if (options.dim < 2) fail(ErrorKind::invalid_input, "lane embedding needs dim >= 2");
  if (options.a <= 0 || options.a >= options.b) {
    fail(ErrorKind::invalid_input, "lane embedding needs 0 < a < b");
  }
  const Time a = options.a;
  const Time gap = options.b - options.a;
  const int load = std::max(spec.m1 + spec.beta1, spec.m2 + spec.beta2);

  // Crossing between the lanes costs 2h b-edges; it must exceed the largest
  // possible imbalance (b - a) * load.
  int h = options.half_gap;
  if (h == 0) {
    h = 2;
    while (2 * h * options.b <= gap * load) ++h;
  }
  if (h < 1) fail(ErrorKind::invalid_input, "half gap must be positive");

  // C_i at odd positions 1, 3, ..., then two free edges, then B_i every
  // other edge, and at least one free edge before the far corner.
  const int min_n = 2 * load + 2;
  int n = options.radius;
  if (n == 0) {
    // The straight b-row along axis 0 must lose against either lane.
    n = std::max<int>(min_n, static_cast<int>((2 * h * a) / gap) + load + 1);
  }
  if (n < min_n) {
    fail(ErrorKind::invalid_input, "radius " + std::to_string(n) + " is too small; lanes need " +
                                       std::to_string(min_n));
  }
  if (2 * n < h + 1) fail(ErrorKind::invalid_input, "box is too small for the lane separation");

  LatticeSpec ls;
  ls.dim = options.dim;
  ls.radius = n;
  ls.a = options.a;
  ls.b = options.b;
  LaneEmbedding out{build_lattice(ls), Environment{}, EdgeSubset{}, spec, h, {}, {}, {}, {}, {}, {}};
  const Lattice& g = out.lattice;
  out.spec.lane_length = 2 * h + n;
  out.env = Environment(g.edge_count(), Level::b);

  Point p(static_cast<std::size_t>(options.dim), 0);
  auto edge = [&](int x, int y, int axis) {
    p[0] = x;
    p[1] = y;
    return g.encode_edge(p, axis);
  };
  auto trace = [&](int row, std::vector<EdgeId>& lane) {
    const int lo = std::min(0, row);
    const int hi = std::max(0, row);
    for (int y = lo; y < hi; ++y) lane.push_back(edge(0, y, 1));
    for (int x = 0; x < n; ++x) lane.push_back(edge(x, row, 0));
    for (int y = lo; y < hi; ++y) lane.push_back(edge(n, y, 1));
  };
  trace(h, out.lane1);
  trace(-h, out.lane2);
  for (EdgeId e : out.lane1) out.env.set(e, Level::a);
  for (EdgeId e : out.lane2) out.env.set(e, Level::a);

  auto groups = [&](int row, int m, int beta, std::vector<EdgeId>& c, std::vector<EdgeId>& bs) {
    for (int t = 0; t < m; ++t) c.push_back(edge(2 * t + 1, row, 0));
    for (int t = 0; t < beta; ++t) bs.push_back(edge(2 * m + 2 + 2 * t, row, 0));
  };
  groups(h, spec.m1, spec.beta1, out.c1, out.b1);
  groups(-h, spec.m2, spec.beta2, out.c2, out.b2);
  for (EdgeId e : out.b1) out.env.set(e, Level::b);
  for (EdgeId e : out.b2) out.env.set(e, Level::b);

  std::vector<EdgeId> s = out.c1;
  s.insert(s.end(), out.c2.begin(), out.c2.end());
  out.s = EdgeSubset(std::move(s));
  return out;
}

namespace {

struct LaneCheck {
  const LaneEmbedding& e;
  std::vector<bool> on_lane;
  std::vector<int> lane_of;  // position in S -> 1 or 2

  explicit LaneCheck(const LaneEmbedding& emb) : e(emb), on_lane(emb.lattice.edge_count(), false) {
    for (EdgeId x : e.lane1) on_lane[x.index] = true;
    for (EdgeId x : e.lane2) on_lane[x.index] = true;
    for (EdgeId x : e.s) {
      lane_of.push_back(std::find(e.c1.begin(), e.c1.end(), x) != e.c1.end() ? 1 : 2);
    }
  }

  void run(PassageSolver& solver, Environment& w, std::uint64_t mask, LaneVerification& v) const {
    int i1 = 0;
    int i2 = 0;
    for (std::size_t i = 0; i < e.s.size(); ++i) {
      const bool high = ((mask >> i) & 1U) != 0;
      w.set(e.s[i], high ? Level::b : Level::a);
      if (high) ++(lane_of[i] == 1 ? i1 : i2);
    }
    const Lattice& g = e.lattice;
    const GeodesicDag dag = geodesic_dag(solver, w);
    if (dag.passage_time != lane_passage_time(e.spec, g.a(), g.b(), i1, i2)) ++v.passage_mismatches;
    for (std::uint32_t j = 0; j < g.edge_count(); ++j) {
      if (dag.orientation[j] != kNone && !on_lane[j]) {
        ++v.stray_geodesics;
        break;
      }
    }
    ++v.assignments;
  }
};

}  // namespace

LaneVerification verify_embedding(const LaneEmbedding& embedding) {
  const LaneCheck check(embedding);
  const auto n = static_cast<std::int64_t>(std::uint64_t{1} << embedding.s.size());
  LaneVerification total;
#pragma omp parallel num_threads(worker_count())
  {
    PassageSolver solver(embedding.lattice);
    Environment w = embedding.env;
    LaneVerification local;
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t mask = 0; mask < n; ++mask) {
      check.run(solver, w, static_cast<std::uint64_t>(mask), local);
    }
#pragma omp critical
    {
      total.assignments += local.assignments;
      total.passage_mismatches += local.passage_mismatches;
      total.stray_geodesics += local.stray_geodesics;
    }
  }
  return total;
}

namespace reference {

LaneVerification verify_embedding(const LaneEmbedding& embedding) {
  const LaneCheck check(embedding);
  PassageSolver solver(embedding.lattice);
  Environment w = embedding.env;
  LaneVerification v;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << embedding.s.size()); ++mask) {
    check.run(solver, w, mask, v);
  }
  return v;
}

}  // namespace reference

LaneEmbedding embed_lanes(const LaneSpec& spec, const EmbedOptions& options) {
  LaneEmbedding e = place_lanes(spec, options);
  const LaneVerification v = verify_embedding(e);
  if (!v.ok()) {
    fail(ErrorKind::verification,
         "lane embedding failed verification: " + std::to_string(v.passage_mismatches) +
             " passage-time mismatches and " + std::to_string(v.stray_geodesics) +
             " assignments with geodesics off the lanes, out of " + std::to_string(v.assignments));
  }
  return e;
}

}  // namespace fpp
