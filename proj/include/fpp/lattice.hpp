#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace fpp {

using Time = std::int64_t;
using Point = std::vector<int>;
using VertexId = std::uint32_t;

/// Dense index of a nearest-neighbour edge, in lexicographic
/// (base vertex, axis) order.
struct EdgeId {
  std::uint32_t index = 0;

  constexpr auto operator<=>(const EdgeId&) const = default;
};

/// Passage-time level of one edge.
enum class Level : std::uint8_t { a = 0, b = 1 };

struct AxisRange {
  int lo = 0;
  int hi = 0;

  constexpr bool operator==(const AxisRange&) const = default;
};

/// Box lattice parameters. Without `reduced_box` the box is [-2n, 2n]^d.
/// Empty `source`/`sink` select the defaults: origin and n*e_1 for the
/// standard box, the lower and upper corners for a reduced box.
struct LatticeSpec {
  int dim = 2;
  int radius = 1;
  std::optional<std::vector<AxisRange>> reduced_box;
  Time a = 1;
  Time b = 2;
  Point source;
  Point sink;

  bool operator==(const LatticeSpec&) const = default;
};

/// One neighbour in the adjacency lists.
struct Arc {
  VertexId to;
  EdgeId edge;
};

/// Immutable box graph with canonical edge indexing. Safe to share
/// between threads.
class Lattice {
 public:
  const LatticeSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim; }
  Time a() const noexcept { return spec_.a; }
  Time b() const noexcept { return spec_.b; }
  Time gap() const noexcept { return spec_.b - spec_.a; }
  bool reduced() const noexcept { return spec_.reduced_box.has_value(); }
  const std::vector<AxisRange>& box() const noexcept { return box_; }

  std::size_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t edge_count() const noexcept { return edge_base_.size(); }

  VertexId source() const noexcept { return source_; }
  VertexId sink() const noexcept { return sink_; }

  bool contains(std::span<const int> point) const noexcept;
  VertexId vertex(std::span<const int> point) const;
  Point point(VertexId v) const;

  EdgeId encode_edge(std::span<const int> base, int axis) const;
  std::pair<Point, int> decode_edge(EdgeId e) const;
  std::optional<EdgeId> find_edge(std::span<const int> base, int axis) const noexcept;

  /// Endpoints (lower, upper) along the edge's axis.
  VertexId lower(EdgeId e) const noexcept { return edge_base_[e.index]; }
  VertexId upper(EdgeId e) const noexcept {
    return edge_base_[e.index] + static_cast<VertexId>(stride_[edge_axis_[e.index]]);
  }
  int axis(EdgeId e) const noexcept { return edge_axis_[e.index]; }

  std::span<const Arc> arcs(VertexId v) const noexcept {
    return {arcs_.data() + arc_offset_[v], arcs_.data() + arc_offset_[v + 1]};
  }

  /// L1 distance between source and sink.
  int graph_distance() const noexcept { return graph_distance_; }

 private:
  friend Lattice build_lattice(LatticeSpec spec);

  LatticeSpec spec_;
  std::vector<AxisRange> box_;
  std::vector<std::size_t> stride_;  // mixed radix, axis 0 most significant
  std::size_t vertex_count_ = 0;
  VertexId source_ = 0;
  VertexId sink_ = 0;
  int graph_distance_ = 0;
  std::vector<VertexId> edge_base_;
  std::vector<std::uint8_t> edge_axis_;
  std::vector<std::int32_t> edge_at_;  // vertex * dim + axis -> edge index or -1
  std::vector<std::size_t> arc_offset_;
  std::vector<Arc> arcs_;
};

/// Validates the spec, fills default endpoints and builds the graph.
/// Throws Error(invalid_input) on dim < 2, radius < 1, a >= b, a <= 0,
/// bad endpoints or a malformed reduced box.
Lattice build_lattice(LatticeSpec spec);

/// One assignment of {a, b} to every edge, stored as a bitset (1 = b).
class Environment {
 public:
  Environment() = default;
  explicit Environment(std::size_t edge_count, Level fill = Level::a);

  std::size_t size() const noexcept { return size_; }

  Level level(EdgeId e) const noexcept {
    return ((words_[e.index >> 6] >> (e.index & 63)) & 1U) != 0 ? Level::b : Level::a;
  }
  bool is_b(EdgeId e) const noexcept { return level(e) == Level::b; }

  void set(EdgeId e, Level v) noexcept {
    const std::uint64_t bit = std::uint64_t{1} << (e.index & 63);
    if (v == Level::b) {
      words_[e.index >> 6] |= bit;
    } else {
      words_[e.index >> 6] &= ~bit;
    }
  }

  std::size_t count_b() const noexcept;

  /// Lexicographic order over edges 0, 1, ... with a < b.
  bool lex_less(const Environment& other) const noexcept;

  bool operator==(const Environment&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

Time weight(const Lattice& lattice, const Environment& env, EdgeId e) noexcept;

/// Sorted, duplicate-free edge set.
class EdgeSubset {
 public:
  EdgeSubset() = default;
  /// Sorts the input; throws Error(invalid_input) on duplicates.
  explicit EdgeSubset(std::vector<EdgeId> edges);

  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }
  const std::vector<EdgeId>& edges() const noexcept { return edges_; }
  EdgeId operator[](std::size_t i) const noexcept { return edges_[i]; }
  auto begin() const noexcept { return edges_.begin(); }
  auto end() const noexcept { return edges_.end(); }
  bool contains(EdgeId e) const noexcept;

  bool operator==(const EdgeSubset&) const = default;
  auto operator<=>(const EdgeSubset&) const = default;

 private:
  std::vector<EdgeId> edges_;
};

/// Throws unless every edge is inside the lattice.
void check_edges(const Lattice& lattice, const EdgeSubset& s);
void check_environment(const Lattice& lattice, const Environment& env);

// Environment file (JSON).

nlohmann::ordered_json environment_to_json(const Lattice& lattice, const Environment& env);
std::string dump_environment(const Lattice& lattice, const Environment& env);

struct LoadedEnvironment {
  Lattice lattice;
  Environment env;
};

LoadedEnvironment environment_from_json(const nlohmann::json& doc);
LoadedEnvironment parse_environment(const std::string& text);
LoadedEnvironment load_environment(const std::filesystem::path& path);
void save_environment(const Lattice& lattice, const Environment& env,
                      const std::filesystem::path& path);

nlohmann::ordered_json edge_to_json(const Lattice& lattice, EdgeId e);
EdgeId edge_from_json(const Lattice& lattice, const nlohmann::json& j);

}  // namespace fpp
