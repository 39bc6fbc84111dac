#pragma once
// Synthetic knowledge graphs with planted relation patterns.
//
// Every descriptor emits a duplicate-free triple set whose logical constraint
// holds exactly in the union of the splits. The split is pattern-aware: a
// triple is only held out when the triples it is inferable from (its mirror
// for symmetric/inverse patterns, one supporting chain for a composed triple)
// stay in train, and every held-out entity keeps at least one train triple.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spacee/kg.hpp"

namespace spacee {

enum class PatternKind {
  Symmetric,      // relations: r;          edges = unordered pairs (2 triples each)
  SkewSymmetric,  // relations: r;          edges = directed triples, never mirrored
  InversePair,    // relations: r1 r2;      edges = triples of r1, mirrored into r2
  Composition,    // relations: r1 r2 r3;   edges = planted chains a-r1->b-r2->c
  FanIn,          // relations: r [inv];    `groups` tails with exactly `fan` heads each
  FanOut,         // relations: r [inv];    `groups` heads with exactly `fan` tails each
};

std::string_view pattern_kind_name(PatternKind k);
PatternKind parse_pattern_kind(std::string_view name);

struct PatternSpec {
  PatternKind kind = PatternKind::Symmetric;
  std::vector<std::string> relations;
  std::size_t edges = 0;
  std::size_t groups = 0;
  std::size_t fan = 0;
};

struct SyntheticSpec {
  std::size_t n_entities = 0;
  std::vector<PatternSpec> patterns;
  std::uint64_t seed = 0;
  // Entities are grouped into consecutive blocks of this size and patterns
  // are planted between blocks: each block-level edge (X, r, Y) becomes every
  // triple from a member of X to a member of Y. Edge, group and fan counts
  // refer to blocks. 1 plants patterns between single entities.
  std::size_t block_size = 1;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
};

// Parses the flat key=value format:
//   n_entities = 200
//   seed = 7
//   block_size = 5
//   pattern = symmetric sym edges=300
//   pattern = fan-in member_of member groups=15 fan=10
SyntheticSpec parse_synthetic_spec(std::string_view text);
SyntheticSpec load_synthetic_spec(const std::string& path);

// Deterministic for a fixed spec (including seed). Throws ConfigError for
// infeasible or inconsistent specs.
SplitDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace spacee
