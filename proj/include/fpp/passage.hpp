#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fpp/lattice.hpp"

namespace fpp {

/// Weight used for a forbidden edge. Large enough to lose against any
/// real path, small enough that sums of a few of them do not overflow.
inline constexpr Time kInfinity = std::numeric_limits<Time>::max() / 4;

/// Label-setting shortest paths (binary heap) with reusable buffers.
/// One solver per thread; the lattice itself is shared.
class PassageSolver {
 public:
  explicit PassageSolver(const Lattice& lattice);

  /// f(source, sink, env). `forbidden` gets the kInfinity weight.
  Time passage_time(const Environment& env, std::optional<EdgeId> forbidden = std::nullopt);

  /// Distances from `origin` to every vertex.
  void distances(VertexId origin, const Environment& env, std::vector<Time>& out,
                 std::optional<EdgeId> forbidden = std::nullopt);

  const Lattice& lattice() const noexcept { return *lattice_; }

 private:
  Time run(VertexId origin, std::optional<VertexId> target, const Environment& env,
           std::optional<EdgeId> forbidden, std::vector<Time>& dist);

  const Lattice* lattice_;
  std::vector<Time> dist_;
  std::vector<std::pair<Time, VertexId>> heap_;
};

Time passage_time(const Lattice& lattice, const Environment& env);

/// Orientation of a geodesic across an edge, relative to the edge's
/// lower and upper endpoints.
enum Orientation : std::uint8_t {
  kNone = 0,
  kForward = 1,   // lower -> upper
  kBackward = 2,  // upper -> lower
};

/// Distance fields from source and sink plus the per-edge orientation
/// flags they imply: edge (u, v) carries a geodesic u -> v iff
/// dsrc(u) + w + dsnk(v) = f.
struct GeodesicDag {
  Time passage_time = 0;
  std::vector<Time> from_source;
  std::vector<Time> to_sink;
  std::vector<std::uint8_t> orientation;  // per edge, Orientation bits

  bool on_geodesic(EdgeId e) const noexcept { return orientation[e.index] != kNone; }
  bool uses(EdgeId e, Orientation o) const noexcept { return (orientation[e.index] & o) != 0; }
};

GeodesicDag geodesic_dag(const Lattice& lattice, const Environment& env);
GeodesicDag geodesic_dag(PassageSolver& solver, const Environment& env);

/// Copy of env with coordinate j set to `value`.
Environment sigma(const Environment& env, EdgeId j, Level value);

/// Composition of single-edge sigma in list order. Rejects length
/// mismatch and repeated edges.
Environment sigma_vector(const Environment& env, std::span<const EdgeId> edges,
                         std::span<const Level> values);

struct EdgeClassification {
  bool essential = false;         // every geodesic uses j
  bool semi_essential = false;    // some geodesic uses j
  bool influential = false;       // first derivative != 0
  bool very_influential = false;  // first derivative == b - a
};

EdgeClassification classify_edge(const Lattice& lattice, const Environment& env, EdgeId j);
EdgeClassification classify_edge(PassageSolver& solver, const Environment& env, EdgeId j);

/// f(sigma_j^b env) - f(sigma_j^a env), always in [0, b - a].
Time first_derivative(const Lattice& lattice, const Environment& env, EdgeId j);
Time first_derivative(PassageSolver& solver, const Environment& env, EdgeId j);

/// True iff some geodesic of sigma_k^a sigma_l^a sigma_m^b(env) crosses k
/// in one direction while some geodesic of sigma_k^a sigma_l^b sigma_m^a(env)
/// crosses it in the other.
bool detect_direction_switch(const Lattice& lattice, const Environment& env, EdgeId k, EdgeId l,
                             EdgeId m);
bool detect_direction_switch(PassageSolver& solver, const Environment& env, EdgeId k, EdgeId l,
                             EdgeId m);

}  // namespace fpp
