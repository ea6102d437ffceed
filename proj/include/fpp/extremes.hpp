#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpp/derivative.hpp"
#include "fpp/lanes.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

enum class SearchMode { exhaustive, randomized, lanes };

const char* to_string(SearchMode mode) noexcept;

/// Known optimal bounds for orders 1..4, in units of (b - a).
inline constexpr std::array<std::int64_t, 4> kTableUpper{1, 1, 1, 2};
inline constexpr std::array<std::int64_t, 4> kTableLower{0, -1, -1, -2};

/// Order-k envelope valid for every order: [0, 1] for k = 1 and
/// [-2^{k-2}, 2^{k-2}] beyond.
std::int64_t envelope_bound(int k);

struct Witness {
  Environment env;
  EdgeSubset s;
};

struct SwitchAudit {
  bool ran = false;
  std::uint64_t switches = 0;  // (k, l, m) role assignments that switch
};

struct ExtremeReport {
  int k = 0;
  SearchMode mode = SearchMode::exhaustive;
  Rational max;
  Rational min;
  Time max_raw = 0;
  Time min_raw = 0;
  std::optional<Witness> max_witness;
  std::optional<Witness> min_witness;
  std::optional<LaneSpec> max_lane;
  std::optional<LaneSpec> min_lane;
  std::uint64_t scanned = 0;
  std::string instance;  // canonical lattice description; empty for lanes mode
  SwitchAudit audit;
};

/// Canonical JSON text of the lattice parameters.
std::string instance_key(const Lattice& lattice);

inline constexpr std::size_t kExhaustiveEdgeCap = 20;
inline constexpr int kExhaustiveOrderCap = 6;

/// Exact extremes over every environment and every |S| = k, for
/// k = 1..max_k, from one hypercube table over all edges. OpenMP over the
/// first edge of S. Ties go to the lexicographically smallest (env, S).
std::vector<ExtremeReport> exhaustive_extremes_upto(const Lattice& lattice, int max_k);
ExtremeReport exhaustive_extremes(const Lattice& lattice, int k);

struct RandomSearchOptions {
  int restarts = 8;
  std::optional<Environment> start_env;  // used by restart 0
  std::optional<EdgeSubset> start_set;   // used by restart 0
};

/// Hill climbing over (env, S) with single-edge flips and single-element
/// swaps of S. `budget` derivative evaluations per objective (max and min),
/// split evenly across restarts. Deterministic for a fixed seed.
ExtremeReport randomized_search(const Lattice& lattice, int k, std::uint64_t budget,
                                std::uint64_t seed, const RandomSearchOptions& options = {});

/// Closed-form scan of every (m1, m2, beta1, beta2) with m1 + m2 = k and
/// betas up to max_beta.
ExtremeReport lanes_family_scan(int k, int max_beta);

/// Max_{k+1} <= max_k - min_k and min_{k+1} >= min_k - max_k. Both reports
/// must be exhaustive, on the same instance, of consecutive orders.
bool check_fibonacci_recursion(const ExtremeReport& order_k, const ExtremeReport& next_order);

/// Throws Error(claim_violation) if the report leaves the envelope.
void check_envelope(const ExtremeReport& report);

/// For a k = 3 witness, tries every role assignment (k, l, m) of S. Each
/// direction switch must come with b >= 3a and d_S f >= 3a - b; otherwise
/// throws Error(claim_violation). Returns the number of switches.
std::uint64_t audit_direction_switch(const Lattice& lattice, const Witness& witness);

namespace reference {

/// Serial scan of every (S, environment) pair, one sub-cube sum each.
std::vector<ExtremeReport> exhaustive_extremes_upto(const Lattice& lattice, int max_k);

}  // namespace reference

}  // namespace fpp
