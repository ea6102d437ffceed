#pragma once

#include <cstdint>
#include <vector>

#include "fpp/lattice.hpp"

namespace fpp {

/// Two-lane extremal family. Lane i carries m_i edges of S (group C_i) and
/// beta_i edges pinned to b (group B_i); both lanes have lane_length edges.
struct LaneSpec {
  int m1 = 0;
  int m2 = 0;
  int beta1 = 0;
  int beta2 = 0;
  int lane_length = 0;

  int order() const noexcept { return m1 + m2; }
  bool operator==(const LaneSpec&) const = default;
};

/// LaneSpec with the shortest admissible lane length.
LaneSpec make_lane_spec(int m1, int m2, int beta1, int beta2);

/// Throws unless counts are non-negative, m1 + m2 >= 2 and the lane
/// length fits both groups.
void validate(const LaneSpec& spec);

/// L*a + (b - a) * min(i1 + beta1, i2 + beta2), where i_k of the C_k edges
/// carry b.
Time lane_passage_time(const LaneSpec& spec, Time a, Time b, int i1, int i2);

/// Signed sum of the lane minimum over all pinnings, in units of (b - a).
/// Requires m1 + m2 <= 24.
std::int64_t lane_derivative_bruteforce(const LaneSpec& spec);

/// Zero when beta1 - beta2 >= m2 or beta2 - beta1 >= m1, otherwise
/// (-1)^{m1+m2+beta1+beta2} binom(m1+m2-2, m1+beta1-beta2-1); units of (b - a).
std::int64_t lane_derivative_closed_form(const LaneSpec& spec);

/// Lattice realisation parameters. Zero radius / half_gap pick the
/// smallest values for which off-lane detours cannot compete.
struct EmbedOptions {
  int dim = 2;
  Time a = 1;
  Time b = 2;
  int radius = 0;
  int half_gap = 0;
};

/// Two lanes in the box [-2n, 2n]^d from the origin to n*e_1: lane 1 climbs
/// to row +h, runs n steps along axis 0 and descends; lane 2 mirrors it at
/// row -h. Lane edges are a except B_1, B_2; every other edge is b.
struct LaneEmbedding {
  Lattice lattice;
  Environment env;
  EdgeSubset s;  // C_1 and C_2
  LaneSpec spec;  // with the realised lane length
  int half_gap = 0;
  std::vector<EdgeId> lane1;
  std::vector<EdgeId> lane2;
  std::vector<EdgeId> c1;
  std::vector<EdgeId> c2;
  std::vector<EdgeId> b1;
  std::vector<EdgeId> b2;
};

struct LaneVerification {
  std::uint64_t assignments = 0;
  std::uint64_t passage_mismatches = 0;
  std::uint64_t stray_geodesics = 0;  // assignments with a geodesic off the lanes
  bool ok() const noexcept { return passage_mismatches == 0 && stray_geodesics == 0; }
};

/// Builds the lattice and environment without verifying them.
/// Throws Error(invalid_input) when the geometry does not fit and
/// Error(size_cap) for m1 + m2 > 10.
LaneEmbedding place_lanes(const LaneSpec& spec, const EmbedOptions& options = {});

/// For every pinning of S: passage time equals lane_passage_time and no
/// geodesic leaves the two lanes. OpenMP over pinnings.
LaneVerification verify_embedding(const LaneEmbedding& embedding);

/// place_lanes + verify_embedding; throws Error(verification) on mismatch.
LaneEmbedding embed_lanes(const LaneSpec& spec, const EmbedOptions& options = {});

namespace reference {

LaneVerification verify_embedding(const LaneEmbedding& embedding);

}  // namespace reference

}  // namespace fpp
