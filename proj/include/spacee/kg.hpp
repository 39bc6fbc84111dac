#pragma once
// Knowledge graph data model: vocabularies, triple stores, split datasets
// and per-relation fan-in/fan-out statistics.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace spacee {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

class Vocabulary {
 public:
  Vocabulary() = default;

  // Returns the id of `name`, assigning the next free id if it is new.
  std::uint32_t intern(std::string_view name);

  // Appends a name with an explicit id; ids must arrive as 0, 1, 2, ...
  void add_with_id(std::uint32_t id, std::string_view name);

  std::optional<std::uint32_t> find(std::string_view name) const;
  std::uint32_t lookup(std::string_view name) const;  // throws on unknown
  const std::string& name_of(std::uint32_t id) const;

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string>& names() const { return names_; }

  // FNV-1a over the newline-joined names; identifies an id assignment.
  std::uint64_t hash() const;

  bool operator==(const Vocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  auto operator<=>(const Triple&) const = default;
};

// Duplicate-free set of triples with projections for both query directions.
class TripleStore {
 public:
  TripleStore() = default;
  explicit TripleStore(const std::vector<Triple>& triples);

  // Returns false (and stores nothing) if the triple is already present.
  bool insert(const Triple& t);

  bool contains(const Triple& t) const;
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const std::vector<Triple>& triples() const { return triples_; }

  // Tails t with (head, relation, t) present; empty if none.
  const std::set<EntityId>& tails_of(EntityId head, RelationId relation) const;
  // Heads h with (h, relation, tail) present; empty if none.
  const std::set<EntityId>& heads_of(RelationId relation, EntityId tail) const;

  const std::map<std::pair<EntityId, RelationId>, std::set<EntityId>>& by_hr() const {
    return by_hr_;
  }
  const std::map<std::pair<RelationId, EntityId>, std::set<EntityId>>& by_rt() const {
    return by_rt_;
  }

 private:
  std::vector<Triple> triples_;
  std::set<Triple> members_;
  std::map<std::pair<EntityId, RelationId>, std::set<EntityId>> by_hr_;
  std::map<std::pair<RelationId, EntityId>, std::set<EntityId>> by_rt_;
};

struct SplitDataset {
  Vocabulary entities;
  Vocabulary relations;
  TripleStore train;
  TripleStore valid;
  TripleStore test;
  TripleStore filter_all;  // union of the three splits
  std::vector<EntityId> unseen_entities;  // in valid/test but absent from train, ascending

  bool is_unseen(EntityId e) const;
  // True if head or tail never occurs in train.
  bool has_unseen_entity(const Triple& t) const;
};

// Builds filter_all and unseen_entities from the three splits.
void finalize_dataset(SplitDataset& ds);

// Reads train.txt / valid.txt / test.txt (head<TAB>relation<TAB>tail) from `dir`.
// Optional entities.dict / relations.dict ("id<TAB>name") fix the id assignment;
// otherwise ids follow first appearance in train, then valid, then test.
// Duplicate lines within a split are dropped with a warning on `warn` (if given).
SplitDataset load_dataset(const std::filesystem::path& dir, std::ostream* warn = nullptr);

// Writes the three split files plus both dictionaries, so that reloading
// reproduces the id assignment exactly.
void save_dataset(const SplitDataset& ds, const std::filesystem::path& dir);

enum class RelationCategory { OneToOne, OneToMany, ManyToOne, ManyToMany };

std::string_view category_name(RelationCategory c);

struct RelationStats {
  RelationId relation = 0;
  double tphr = 0.0;  // triples / distinct heads
  double hptr = 0.0;  // triples / distinct tails
  RelationCategory category = RelationCategory::OneToOne;
};

inline constexpr double kDefaultCategoryThreshold = 1.5;

RelationCategory categorize(double tphr, double hptr, double threshold);

// One entry per relation with at least one triple, ordered by relation id.
std::vector<RelationStats> relation_stats(const TripleStore& store,
                                          double threshold = kDefaultCategoryThreshold);

// Number of heads attached to (t.relation, t.tail); 0 if the pair is absent.
std::size_t hptr_of_triple(const TripleStore& store, const Triple& t);

inline constexpr int kHptrBuckets = 5;

// 1-based bucket over [0,10], [11,50], [51,100], [101,1000], [1001, inf).
int hptr_bucket(std::size_t hptr);

}  // namespace spacee
