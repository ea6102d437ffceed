#include "fpp/lattice.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <limits>
#include <sstream>

#include "fpp/errors.hpp"

namespace fpp {

namespace {

constexpr std::size_t kMaxVertices = std::size_t{1} << 30;

std::string point_string(std::span<const int> p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

}  // namespace

Lattice build_lattice(LatticeSpec spec) {
  if (spec.dim < 2) fail(ErrorKind::invalid_input, "dim must be >= 2");
  if (spec.radius < 1) fail(ErrorKind::invalid_input, "radius must be >= 1");
  if (spec.a <= 0) fail(ErrorKind::invalid_input, "passage time a must be positive");
  if (spec.a >= spec.b) fail(ErrorKind::invalid_input, "passage times must satisfy a < b");

  Lattice g;
  const auto d = static_cast<std::size_t>(spec.dim);
  if (spec.reduced_box) {
    if (spec.reduced_box->size() != d) {
      fail(ErrorKind::invalid_input, "reduced box needs one [lo,hi] range per axis");
    }
    for (const auto& r : *spec.reduced_box) {
      if (r.lo > r.hi) fail(ErrorKind::invalid_input, "reduced box range has lo > hi");
    }
    g.box_ = *spec.reduced_box;
  } else {
    const int half = 2 * spec.radius;
    g.box_.assign(d, AxisRange{-half, half});
  }

  g.stride_.assign(d, 1);
  std::size_t count = 1;
  for (std::size_t ax = d; ax-- > 0;) {
    g.stride_[ax] = count;
    const auto side = static_cast<std::size_t>(g.box_[ax].hi - g.box_[ax].lo + 1);
    if (count > kMaxVertices / side) fail(ErrorKind::size_cap, "box has too many vertices");
    count *= side;
  }
  g.vertex_count_ = count;

  if (spec.source.empty()) {
    spec.source.assign(d, 0);
    if (spec.reduced_box) {
      for (std::size_t ax = 0; ax < d; ++ax) spec.source[ax] = g.box_[ax].lo;
    }
  }
  if (spec.sink.empty()) {
    spec.sink.assign(d, 0);
    if (spec.reduced_box) {
      for (std::size_t ax = 0; ax < d; ++ax) spec.sink[ax] = g.box_[ax].hi;
    } else {
      spec.sink[0] = spec.radius;
    }
  }
  g.spec_ = std::move(spec);
  const LatticeSpec& s = g.spec_;
  if (s.source.size() != d || s.sink.size() != d) {
    fail(ErrorKind::invalid_input, "source and sink need one coordinate per axis");
  }
  if (!g.contains(s.source)) {
    fail(ErrorKind::invalid_input, "source " + point_string(s.source) + " is outside the box");
  }
  if (!g.contains(s.sink)) {
    fail(ErrorKind::invalid_input, "sink " + point_string(s.sink) + " is outside the box");
  }
  if (s.source == s.sink) fail(ErrorKind::invalid_input, "source and sink must differ");
  g.source_ = g.vertex(s.source);
  g.sink_ = g.vertex(s.sink);
  g.graph_distance_ = 0;
  for (std::size_t ax = 0; ax < d; ++ax) g.graph_distance_ += std::abs(s.source[ax] - s.sink[ax]);

  // Edges in lexicographic (base vertex, axis) order: vertices are visited
  // in mixed-radix order, which is lexicographic with axis 0 most significant.
  g.edge_at_.assign(count * d, -1);
  Point p(d);
  for (std::size_t v = 0; v < count; ++v) {
    std::size_t rest = v;
    for (std::size_t ax = 0; ax < d; ++ax) {
      p[ax] = g.box_[ax].lo + static_cast<int>(rest / g.stride_[ax]);
      rest %= g.stride_[ax];
    }
    for (std::size_t ax = 0; ax < d; ++ax) {
      if (p[ax] < g.box_[ax].hi) {
        if (g.edge_base_.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
          fail(ErrorKind::size_cap, "box has too many edges");
        }
        g.edge_at_[v * d + ax] = static_cast<std::int32_t>(g.edge_base_.size());
        g.edge_base_.push_back(static_cast<VertexId>(v));
        g.edge_axis_.push_back(static_cast<std::uint8_t>(ax));
      }
    }
  }

  std::vector<std::size_t> degree(count + 1, 0);
  for (std::size_t e = 0; e < g.edge_base_.size(); ++e) {
    const EdgeId id{static_cast<std::uint32_t>(e)};
    ++degree[g.lower(id)];
    ++degree[g.upper(id)];
  }
  g.arc_offset_.assign(count + 1, 0);
  for (std::size_t v = 0; v < count; ++v) g.arc_offset_[v + 1] = g.arc_offset_[v] + degree[v];
  g.arcs_.resize(g.arc_offset_[count]);
  std::vector<std::size_t> fill(g.arc_offset_.begin(), g.arc_offset_.end() - 1);
  for (std::size_t e = 0; e < g.edge_base_.size(); ++e) {
    const EdgeId id{static_cast<std::uint32_t>(e)};
    const VertexId lo = g.lower(id);
    const VertexId hi = g.upper(id);
    g.arcs_[fill[lo]++] = Arc{hi, id};
    g.arcs_[fill[hi]++] = Arc{lo, id};
  }
  return g;
}

bool Lattice::contains(std::span<const int> point) const noexcept {
  if (point.size() != box_.size()) return false;
  for (std::size_t ax = 0; ax < box_.size(); ++ax) {
    if (point[ax] < box_[ax].lo || point[ax] > box_[ax].hi) return false;
  }
  return true;
}

VertexId Lattice::vertex(std::span<const int> point) const {
  if (!contains(point)) {
    fail(ErrorKind::invalid_input, "vertex " + point_string(point) + " is outside the box");
  }
  std::size_t v = 0;
  for (std::size_t ax = 0; ax < box_.size(); ++ax) {
    v += static_cast<std::size_t>(point[ax] - box_[ax].lo) * stride_[ax];
  }
  return static_cast<VertexId>(v);
}

Point Lattice::point(VertexId v) const {
  Point p(box_.size());
  std::size_t rest = v;
  for (std::size_t ax = 0; ax < box_.size(); ++ax) {
    p[ax] = box_[ax].lo + static_cast<int>(rest / stride_[ax]);
    rest %= stride_[ax];
  }
  return p;
}

std::optional<EdgeId> Lattice::find_edge(std::span<const int> base, int axis) const noexcept {
  if (axis < 0 || axis >= dim() || !contains(base)) return std::nullopt;
  std::size_t v = 0;
  for (std::size_t ax = 0; ax < box_.size(); ++ax) {
    v += static_cast<std::size_t>(base[ax] - box_[ax].lo) * stride_[ax];
  }
  const std::int32_t id = edge_at_[v * box_.size() + static_cast<std::size_t>(axis)];
  if (id < 0) return std::nullopt;
  return EdgeId{static_cast<std::uint32_t>(id)};
}

EdgeId Lattice::encode_edge(std::span<const int> base, int axis) const {
  if (axis < 0 || axis >= dim()) {
    fail(ErrorKind::invalid_input, "edge axis " + std::to_string(axis) + " out of range");
  }
  if (auto e = find_edge(base, axis)) return *e;
  fail(ErrorKind::invalid_input, "edge at " + point_string(base) + " along axis " +
                                     std::to_string(axis) + " leaves the box");
}

std::pair<Point, int> Lattice::decode_edge(EdgeId e) const {
  if (e.index >= edge_count()) {
    fail(ErrorKind::invalid_input, "edge index " + std::to_string(e.index) + " out of range");
  }
  return {point(edge_base_[e.index]), edge_axis_[e.index]};
}

Environment::Environment(std::size_t edge_count, Level fill)
    : size_(edge_count), words_((edge_count + 63) / 64, fill == Level::b ? ~std::uint64_t{0} : 0) {
  if (fill == Level::b && (edge_count & 63) != 0) {
    words_.back() &= (std::uint64_t{1} << (edge_count & 63)) - 1;
  }
}

std::size_t Environment::count_b() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool Environment::lex_less(const Environment& other) const noexcept {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t diff = words_[i] ^ other.words_[i];
    if (diff != 0) {
      const std::uint64_t low = diff & (~diff + 1);
      return (words_[i] & low) == 0;
    }
  }
  return size_ < other.size_;
}

Time weight(const Lattice& lattice, const Environment& env, EdgeId e) noexcept {
  return env.is_b(e) ? lattice.b() : lattice.a();
}

EdgeSubset::EdgeSubset(std::vector<EdgeId> edges) : edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    fail(ErrorKind::invalid_input, "edge subset contains a duplicate edge");
  }
}

bool EdgeSubset::contains(EdgeId e) const noexcept {
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

void check_edges(const Lattice& lattice, const EdgeSubset& s) {
  for (EdgeId e : s) {
    if (e.index >= lattice.edge_count()) {
      fail(ErrorKind::invalid_input, "edge index " + std::to_string(e.index) + " out of range");
    }
  }
}

void check_environment(const Lattice& lattice, const Environment& env) {
  if (env.size() != lattice.edge_count()) {
    fail(ErrorKind::invalid_input, "environment has " + std::to_string(env.size()) +
                                       " edges, lattice has " + std::to_string(lattice.edge_count()));
  }
}

nlohmann::ordered_json edge_to_json(const Lattice& lattice, EdgeId e) {
  auto [base, axis] = lattice.decode_edge(e);
  nlohmann::ordered_json j;
  j["base"] = base;
  j["axis"] = axis;
  return j;
}

EdgeId edge_from_json(const Lattice& lattice, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("base") || !j.contains("axis")) {
    fail(ErrorKind::invalid_input, "edge record needs \"base\" and \"axis\"");
  }
  const auto base = j.at("base").get<Point>();
  const int axis = j.at("axis").get<int>();
  if (base.size() != static_cast<std::size_t>(lattice.dim())) {
    fail(ErrorKind::invalid_input, "edge base has wrong dimension");
  }
  return lattice.encode_edge(base, axis);
}

nlohmann::ordered_json environment_to_json(const Lattice& lattice, const Environment& env) {
  check_environment(lattice, env);
  const LatticeSpec& s = lattice.spec();
  // The majority level is the default (ties go to a), so canonical files
  // list the shorter exception set and round-trip byte for byte.
  const std::size_t nb = env.count_b();
  const Level def = nb * 2 > env.size() ? Level::b : Level::a;

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
  j["default"] = def == Level::a ? "a" : "b";
  auto exceptions = nlohmann::ordered_json::array();
  for (std::uint32_t i = 0; i < env.size(); ++i) {
    if (env.level(EdgeId{i}) != def) exceptions.push_back(edge_to_json(lattice, EdgeId{i}));
  }
  j["exceptions"] = std::move(exceptions);
  return j;
}

std::string dump_environment(const Lattice& lattice, const Environment& env) {
  return environment_to_json(lattice, env).dump(2) + "\n";
}

LoadedEnvironment environment_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) fail(ErrorKind::invalid_input, "environment file must be a JSON object");
    for (const char* key : {"dim", "a", "b", "default", "exceptions"}) {
      if (!doc.contains(key)) {
        fail(ErrorKind::invalid_input, std::string("environment file is missing \"") + key + "\"");
      }
    }
    LatticeSpec spec;
    spec.dim = doc.at("dim").get<int>();
    spec.radius = doc.value("radius", 1);
    spec.a = doc.at("a").get<Time>();
    spec.b = doc.at("b").get<Time>();
    if (doc.contains("reduced_box")) {
      std::vector<AxisRange> box;
      for (const auto& r : doc.at("reduced_box")) {
        if (!r.is_array() || r.size() != 2) {
          fail(ErrorKind::invalid_input, "reduced_box entries must be [lo, hi]");
        }
        box.push_back({r[0].get<int>(), r[1].get<int>()});
      }
      spec.reduced_box = std::move(box);
    }
    if (doc.contains("source")) spec.source = doc.at("source").get<Point>();
    if (doc.contains("sink")) spec.sink = doc.at("sink").get<Point>();

    const auto def_name = doc.at("default").get<std::string>();
    if (def_name != "a" && def_name != "b") {
      fail(ErrorKind::invalid_input, "\"default\" must be \"a\" or \"b\"");
    }
    const Level def = def_name == "a" ? Level::a : Level::b;
    const Level other = def == Level::a ? Level::b : Level::a;

    Lattice lattice = build_lattice(std::move(spec));
    Environment env(lattice.edge_count(), def);
    std::vector<bool> seen(lattice.edge_count(), false);
    for (const auto& ex : doc.at("exceptions")) {
      const EdgeId e = edge_from_json(lattice, ex);
      if (seen[e.index]) fail(ErrorKind::invalid_input, "duplicate exception edge");
      seen[e.index] = true;
      env.set(e, other);
    }
    return {std::move(lattice), std::move(env)};
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::invalid_input, std::string("malformed environment file: ") + ex.what());
  }
}

LoadedEnvironment parse_environment(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::invalid_input, std::string("environment file is not valid JSON: ") + ex.what());
  }
  return environment_from_json(doc);
}

LoadedEnvironment load_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::invalid_input, "cannot open environment file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_environment(buf.str());
}

void save_environment(const Lattice& lattice, const Environment& env,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::invalid_input, "cannot write environment file " + path.string());
  out << dump_environment(lattice, env);
}

}  // namespace fpp
