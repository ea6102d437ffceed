#pragma once

// Small instances and independent oracles shared by the unit tests.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "fpp/lattice.hpp"

namespace fpp::testing {

inline Lattice box(std::vector<AxisRange> ranges, Time a = 1, Time b = 2, Point source = {},
                   Point sink = {}) {
  LatticeSpec s;
  s.dim = static_cast<int>(ranges.size());
  s.reduced_box = std::move(ranges);
  s.a = a;
  s.b = b;
  s.source = std::move(source);
  s.sink = std::move(sink);
  return build_lattice(std::move(s));
}

inline Environment from_mask(const Lattice& g, std::uint64_t mask) {
  Environment w(g.edge_count());
  for (std::uint32_t i = 0; i < g.edge_count(); ++i) {
    if (((mask >> i) & 1U) != 0) w.set(EdgeId{i}, Level::b);
  }
  return w;
}

inline Environment random_env(const Lattice& g, std::mt19937_64& rng) {
  Environment w(g.edge_count());
  for (std::uint32_t i = 0; i < g.edge_count(); ++i) {
    if ((rng() & 1U) != 0) w.set(EdgeId{i}, Level::b);
  }
  return w;
}

inline EdgeSubset random_subset(const Lattice& g, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::uint32_t> all(g.edge_count());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<EdgeId> s;
  for (std::size_t i = 0; i < k; ++i) s.push_back(EdgeId{all[i]});
  return EdgeSubset(std::move(s));
}

/// Graph rebuilt from box coordinates alone, for oracles that should not
/// lean on the lattice's adjacency lists.
struct PlainGraph {
  std::vector<Point> points;
  std::map<Point, int> index;
  struct Link {
    int u;
    int v;  // v = u + e_axis
    EdgeId edge;
  };
  std::vector<Link> links;
  int source = 0;
  int sink = 0;
};

inline PlainGraph plain_graph(const Lattice& g) {
  PlainGraph pg;
  const auto& box = g.box();
  Point p(box.size());
  std::function<void(std::size_t)> fill = [&](std::size_t axis) {
    if (axis == box.size()) {
      pg.index[p] = static_cast<int>(pg.points.size());
      pg.points.push_back(p);
      return;
    }
    for (int x = box[axis].lo; x <= box[axis].hi; ++x) {
      p[axis] = x;
      fill(axis + 1);
    }
  };
  fill(0);
  for (const auto& q : pg.points) {
    for (int axis = 0; axis < static_cast<int>(q.size()); ++axis) {
      Point r = q;
      ++r[static_cast<std::size_t>(axis)];
      auto it = pg.index.find(r);
      if (it == pg.index.end()) continue;
      pg.links.push_back({pg.index[q], it->second, g.encode_edge(q, axis)});
    }
  }
  pg.source = pg.index[g.point(g.source())];
  pg.sink = pg.index[g.point(g.sink())];
  return pg;
}

/// Bellman-Ford over the plain edge list.
inline Time oracle_passage(const Lattice& g, const PlainGraph& pg, const Environment& env) {
  constexpr Time inf = std::numeric_limits<Time>::max() / 4;
  std::vector<Time> d(pg.points.size(), inf);
  d[static_cast<std::size_t>(pg.source)] = 0;
  for (std::size_t round = 0; round < pg.points.size(); ++round) {
    bool changed = false;
    for (const auto& l : pg.links) {
      const Time w = env.is_b(l.edge) ? g.b() : g.a();
      auto& du = d[static_cast<std::size_t>(l.u)];
      auto& dv = d[static_cast<std::size_t>(l.v)];
      if (du + w < dv) {
        dv = du + w;
        changed = true;
      }
      if (dv + w < du) {
        du = dv + w;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d[static_cast<std::size_t>(pg.sink)];
}

inline Time oracle_passage(const Lattice& g, const Environment& env) {
  return oracle_passage(g, plain_graph(g), env);
}

/// Every simple source-sink path as (edge, forward?) steps. Tiny graphs only.
struct Step {
  EdgeId edge;
  bool forward;
};
using Path = std::vector<Step>;

inline std::vector<Path> all_simple_paths(const PlainGraph& pg) {
  std::vector<std::vector<std::pair<int, Step>>> adj(pg.points.size());
  for (const auto& l : pg.links) {
    adj[static_cast<std::size_t>(l.u)].push_back({l.v, {l.edge, true}});
    adj[static_cast<std::size_t>(l.v)].push_back({l.u, {l.edge, false}});
  }
  std::vector<Path> out;
  std::vector<bool> seen(pg.points.size(), false);
  Path cur;
  std::function<void(int)> walk = [&](int u) {
    if (u == pg.sink) {
      out.push_back(cur);
      return;
    }
    seen[static_cast<std::size_t>(u)] = true;
    for (const auto& [v, step] : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      cur.push_back(step);
      walk(v);
      cur.pop_back();
    }
    seen[static_cast<std::size_t>(u)] = false;
  };
  walk(pg.source);
  return out;
}

inline Time path_cost(const Lattice& g, const Environment& env, const Path& path) {
  Time t = 0;
  for (const auto& s : path) t += env.is_b(s.edge) ? g.b() : g.a();
  return t;
}

/// Leibniz sum written against the oracle passage time.
inline Time oracle_derivative(const Lattice& g, const PlainGraph& pg, const Environment& env,
                              const std::vector<EdgeId>& s) {
  Time sum = 0;
  for (std::uint64_t theta = 0; theta < (std::uint64_t{1} << s.size()); ++theta) {
    Environment w = env;
    int a_count = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool high = ((theta >> i) & 1U) != 0;
      w.set(s[i], high ? Level::b : Level::a);
      a_count += high ? 0 : 1;
    }
    const Time f = oracle_passage(g, pg, w);
    sum += (a_count % 2 == 0) ? f : -f;
  }
  return sum;
}

}  // namespace fpp::testing
