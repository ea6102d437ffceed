#include "fpp/passage.hpp"

#include <algorithm>
#include <functional>

#include "fpp/errors.hpp"

namespace fpp {

PassageSolver::PassageSolver(const Lattice& lattice) : lattice_(&lattice) {
  dist_.reserve(lattice.vertex_count());
  heap_.reserve(lattice.vertex_count());
}

Time PassageSolver::run(VertexId origin, std::optional<VertexId> target, const Environment& env,
                        std::optional<EdgeId> forbidden, std::vector<Time>& dist) {
  check_environment(*lattice_, env);
  const Time a = lattice_->a();
  const Time b = lattice_->b();
  dist.assign(lattice_->vertex_count(), std::numeric_limits<Time>::max());
  heap_.clear();
  constexpr auto later = std::greater<>{};

  dist[origin] = 0;
  heap_.emplace_back(0, origin);
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    const auto [d, u] = heap_.back();
    heap_.pop_back();
    if (d != dist[u]) continue;
    if (target && u == *target) return d;
    for (const Arc& arc : lattice_->arcs(u)) {
      Time w = env.is_b(arc.edge) ? b : a;
      if (forbidden && arc.edge == *forbidden) w = kInfinity;
      const Time nd = d + w;
      if (nd < dist[arc.to]) {
        dist[arc.to] = nd;
        heap_.emplace_back(nd, arc.to);
        std::push_heap(heap_.begin(), heap_.end(), later);
      }
    }
  }
  return target ? dist[*target] : 0;
}

Time PassageSolver::passage_time(const Environment& env, std::optional<EdgeId> forbidden) {
  return run(lattice_->source(), lattice_->sink(), env, forbidden, dist_);
}

void PassageSolver::distances(VertexId origin, const Environment& env, std::vector<Time>& out,
                              std::optional<EdgeId> forbidden) {
  run(origin, std::nullopt, env, forbidden, out);
}

Time passage_time(const Lattice& lattice, const Environment& env) {
  PassageSolver solver(lattice);
  return solver.passage_time(env);
}

GeodesicDag geodesic_dag(PassageSolver& solver, const Environment& env) {
  const Lattice& g = solver.lattice();
  GeodesicDag dag;
  solver.distances(g.source(), env, dag.from_source);
  solver.distances(g.sink(), env, dag.to_sink);
  dag.passage_time = dag.from_source[g.sink()];
  dag.orientation.assign(g.edge_count(), kNone);
  const Time f = dag.passage_time;
  for (std::uint32_t i = 0; i < g.edge_count(); ++i) {
    const EdgeId e{i};
    const Time w = weight(g, env, e);
    const VertexId lo = g.lower(e);
    const VertexId hi = g.upper(e);
    std::uint8_t o = kNone;
    if (dag.from_source[lo] + w + dag.to_sink[hi] == f) o |= kForward;
    if (dag.from_source[hi] + w + dag.to_sink[lo] == f) o |= kBackward;
    dag.orientation[i] = o;
  }
  return dag;
}

GeodesicDag geodesic_dag(const Lattice& lattice, const Environment& env) {
  PassageSolver solver(lattice);
  return geodesic_dag(solver, env);
}

Environment sigma(const Environment& env, EdgeId j, Level value) {
  if (j.index >= env.size()) fail(ErrorKind::invalid_input, "sigma: edge out of range");
  Environment out = env;
  out.set(j, value);
  return out;
}

Environment sigma_vector(const Environment& env, std::span<const EdgeId> edges,
                         std::span<const Level> values) {
  if (edges.size() != values.size()) {
    fail(ErrorKind::invalid_input, "sigma_vector: edge and value lists differ in length");
  }
  std::vector<EdgeId> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail(ErrorKind::invalid_input, "sigma_vector: repeated edge");
  }
  Environment out = env;
  // sigma_{v1}^{x1} o ... o sigma_{vm}^{xm}: the last one acts first.
  for (std::size_t i = edges.size(); i-- > 0;) {
    if (edges[i].index >= env.size()) fail(ErrorKind::invalid_input, "sigma_vector: edge out of range");
    out.set(edges[i], values[i]);
  }
  return out;
}

Time first_derivative(PassageSolver& solver, const Environment& env, EdgeId j) {
  Environment w = env;
  w.set(j, Level::b);
  const Time high = solver.passage_time(w);
  w.set(j, Level::a);
  return high - solver.passage_time(w);
}

Time first_derivative(const Lattice& lattice, const Environment& env, EdgeId j) {
  PassageSolver solver(lattice);
  return first_derivative(solver, env, j);
}

EdgeClassification classify_edge(PassageSolver& solver, const Environment& env, EdgeId j) {
  const Lattice& g = solver.lattice();
  if (j.index >= g.edge_count()) fail(ErrorKind::invalid_input, "classify_edge: edge out of range");
  EdgeClassification c;
  const GeodesicDag dag = geodesic_dag(solver, env);
  c.semi_essential = dag.on_geodesic(j);
  c.essential = c.semi_essential && solver.passage_time(env, j) > dag.passage_time;
  const Time d = first_derivative(solver, env, j);
  c.influential = d != 0;
  c.very_influential = d == g.gap();
  return c;
}

EdgeClassification classify_edge(const Lattice& lattice, const Environment& env, EdgeId j) {
  PassageSolver solver(lattice);
  return classify_edge(solver, env, j);
}

bool detect_direction_switch(PassageSolver& solver, const Environment& env, EdgeId k, EdgeId l,
                             EdgeId m) {
  if (k == l || k == m || l == m) {
    fail(ErrorKind::invalid_input, "direction switch needs three distinct edges");
  }
  const std::size_t n = solver.lattice().edge_count();
  if (k.index >= n || l.index >= n || m.index >= n) {
    fail(ErrorKind::invalid_input, "direction switch: edge out of range");
  }
  Environment first = env;
  first.set(k, Level::a);
  first.set(l, Level::a);
  first.set(m, Level::b);
  Environment second = env;
  second.set(k, Level::a);
  second.set(l, Level::b);
  second.set(m, Level::a);
  const std::uint8_t o1 = geodesic_dag(solver, first).orientation[k.index];
  if (o1 == kNone) return false;
  const std::uint8_t o2 = geodesic_dag(solver, second).orientation[k.index];
  return ((o1 & kForward) && (o2 & kBackward)) || ((o1 & kBackward) && (o2 & kForward));
}

bool detect_direction_switch(const Lattice& lattice, const Environment& env, EdgeId k, EdgeId l,
                             EdgeId m) {
  PassageSolver solver(lattice);
  return detect_direction_switch(solver, env, k, l, m);
}

}  // namespace fpp
