#include "spacee/kg.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "spacee/error.hpp"

namespace spacee {

namespace fs = std::filesystem;

std::uint32_t Vocabulary::intern(std::string_view name) {
  if (auto it = index_.find(std::string(name)); it != index_.end()) {
    return it->second;
  }
  auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

void Vocabulary::add_with_id(std::uint32_t id, std::string_view name) {
  if (id != names_.size()) {
    throw IoError("dictionary ids must be contiguous from 0; got " + std::to_string(id) +
                  " where " + std::to_string(names_.size()) + " was expected");
  }
  if (index_.count(std::string(name)) != 0) {
    throw IoError("duplicate dictionary name '" + std::string(name) + "'");
  }
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::lookup(std::string_view name) const {
  auto id = find(name);
  if (!id) throw ConfigError("unknown name '" + std::string(name) + "'");
  return *id;
}

const std::string& Vocabulary::name_of(std::uint32_t id) const {
  if (id >= names_.size()) throw ConfigError("id out of range: " + std::to_string(id));
  return names_[id];
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& n : names_) {
    for (char c : n) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

TripleStore::TripleStore(const std::vector<Triple>& triples) {
  for (const auto& t : triples) insert(t);
}

bool TripleStore::insert(const Triple& t) {
  if (!members_.insert(t).second) return false;
  triples_.push_back(t);
  by_hr_[{t.head, t.relation}].insert(t.tail);
  by_rt_[{t.relation, t.tail}].insert(t.head);
  return true;
}

bool TripleStore::contains(const Triple& t) const { return members_.count(t) != 0; }

namespace {
const std::set<EntityId> kEmptySet;
}

const std::set<EntityId>& TripleStore::tails_of(EntityId head, RelationId relation) const {
  auto it = by_hr_.find({head, relation});
  return it == by_hr_.end() ? kEmptySet : it->second;
}

const std::set<EntityId>& TripleStore::heads_of(RelationId relation, EntityId tail) const {
  auto it = by_rt_.find({relation, tail});
  return it == by_rt_.end() ? kEmptySet : it->second;
}

bool SplitDataset::is_unseen(EntityId e) const {
  return std::binary_search(unseen_entities.begin(), unseen_entities.end(), e);
}

bool SplitDataset::has_unseen_entity(const Triple& t) const {
  return is_unseen(t.head) || is_unseen(t.tail);
}

void finalize_dataset(SplitDataset& ds) {
  ds.filter_all = TripleStore();
  for (const auto* split : {&ds.train, &ds.valid, &ds.test}) {
    for (const auto& t : split->triples()) ds.filter_all.insert(t);
  }
  std::vector<bool> in_train(ds.entities.size(), false);
  for (const auto& t : ds.train.triples()) {
    in_train[t.head] = true;
    in_train[t.tail] = true;
  }
  std::set<EntityId> unseen;
  for (const auto* split : {&ds.valid, &ds.test}) {
    for (const auto& t : split->triples()) {
      if (!in_train[t.head]) unseen.insert(t.head);
      if (!in_train[t.tail]) unseen.insert(t.tail);
    }
  }
  ds.unseen_entities.assign(unseen.begin(), unseen.end());
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

struct RawTriple {
  std::string head, relation, tail;
  std::size_t line = 0;
};

std::vector<RawTriple> read_triple_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<RawTriple> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw IoError(file.string() + ":" + std::to_string(lineno) +
                    ": expected head<TAB>relation<TAB>tail");
    }
    rows.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), lineno});
  }
  return rows;
}

Vocabulary read_dict(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<std::pair<std::uint32_t, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    std::uint32_t id = 0;
    bool ok = fields.size() == 2 && !fields[1].empty();
    if (ok) {
      try {
        std::size_t used = 0;
        unsigned long v = std::stoul(std::string(fields[0]), &used);
        ok = used == fields[0].size() && v <= UINT32_MAX;
        id = static_cast<std::uint32_t>(v);
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) throw IoError(file.string() + ":" + std::to_string(lineno) + ": expected id<TAB>name");
    rows.emplace_back(id, std::string(fields[1]));
  }
  std::sort(rows.begin(), rows.end());
  Vocabulary vocab;
  for (const auto& [id, name] : rows) vocab.add_with_id(id, name);
  return vocab;
}

const char* kSplitFiles[3] = {"train.txt", "valid.txt", "test.txt"};

}  // namespace

SplitDataset load_dataset(const fs::path& dir, std::ostream* warn) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());

  std::vector<RawTriple> raw[3];
  for (int s = 0; s < 3; ++s) {
    auto file = dir / kSplitFiles[s];
    if (!fs::exists(file)) throw IoError("missing dataset file: " + file.string());
    raw[s] = read_triple_file(file);
  }

  SplitDataset ds;
  const bool fixed_entities = fs::exists(dir / "entities.dict");
  const bool fixed_relations = fs::exists(dir / "relations.dict");
  if (fixed_entities) ds.entities = read_dict(dir / "entities.dict");
  if (fixed_relations) ds.relations = read_dict(dir / "relations.dict");

  TripleStore* stores[3] = {&ds.train, &ds.valid, &ds.test};
  for (int s = 0; s < 3; ++s) {
    const auto file = (dir / kSplitFiles[s]).string();
    std::size_t dups = 0;
    for (const auto& row : raw[s]) {
      auto resolve = [&](Vocabulary& v, bool fixed, const std::string& name) {
        if (!fixed) return v.intern(name);
        auto id = v.find(name);
        if (!id) {
          throw IoError(file + ":" + std::to_string(row.line) + ": '" + name +
                        "' is not in the dictionary");
        }
        return *id;
      };
      Triple t;
      t.head = resolve(ds.entities, fixed_entities, row.head);
      t.relation = resolve(ds.relations, fixed_relations, row.relation);
      t.tail = resolve(ds.entities, fixed_entities, row.tail);
      if (!stores[s]->insert(t)) ++dups;
    }
    if (dups > 0 && warn != nullptr) {
      *warn << "warning: " << file << ": dropped " << dups << " duplicate triple(s)\n";
    }
  }
  finalize_dataset(ds);
  return ds;
}

void save_dataset(const SplitDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  auto write_dict = [&](const Vocabulary& v, const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    for (std::size_t i = 0; i < v.size(); ++i) out << i << '\t' << v.names()[i] << '\n';
  };
  write_dict(ds.entities, "entities.dict");
  write_dict(ds.relations, "relations.dict");
  const TripleStore* stores[3] = {&ds.train, &ds.valid, &ds.test};
  for (int s = 0; s < 3; ++s) {
    std::ofstream out(dir / kSplitFiles[s]);
    if (!out) throw IoError("cannot write " + (dir / kSplitFiles[s]).string());
    for (const auto& t : stores[s]->triples()) {
      out << ds.entities.name_of(t.head) << '\t' << ds.relations.name_of(t.relation) << '\t'
          << ds.entities.name_of(t.tail) << '\n';
    }
  }
}

std::string_view category_name(RelationCategory c) {
  switch (c) {
    case RelationCategory::OneToOne: return "1-1";
    case RelationCategory::OneToMany: return "1-N";
    case RelationCategory::ManyToOne: return "N-1";
    case RelationCategory::ManyToMany: return "N-N";
  }
  return "?";
}

RelationCategory categorize(double tphr, double hptr, double threshold) {
  const bool many_tails = tphr >= threshold;
  const bool many_heads = hptr >= threshold;
  if (!many_tails && !many_heads) return RelationCategory::OneToOne;
  if (many_tails && !many_heads) return RelationCategory::OneToMany;
  if (!many_tails && many_heads) return RelationCategory::ManyToOne;
  return RelationCategory::ManyToMany;
}

std::vector<RelationStats> relation_stats(const TripleStore& store, double threshold) {
  if (!(threshold > 1.0)) throw ConfigError("category threshold must be > 1");
  struct Acc {
    std::size_t triples = 0, heads = 0, tails = 0;
  };
  std::map<RelationId, Acc> acc;
  for (const auto& t : store.triples()) ++acc[t.relation].triples;
  for (const auto& [key, tails] : store.by_hr()) ++acc[key.second].heads;
  for (const auto& [key, heads] : store.by_rt()) ++acc[key.first].tails;

  std::vector<RelationStats> out;
  out.reserve(acc.size());
  for (const auto& [r, a] : acc) {
    RelationStats s;
    s.relation = r;
    s.tphr = static_cast<double>(a.triples) / static_cast<double>(a.heads);
    s.hptr = static_cast<double>(a.triples) / static_cast<double>(a.tails);
    s.category = categorize(s.tphr, s.hptr, threshold);
    out.push_back(s);
  }
  return out;
}

std::size_t hptr_of_triple(const TripleStore& store, const Triple& t) {
  return store.heads_of(t.relation, t.tail).size();
}

int hptr_bucket(std::size_t hptr) {
  if (hptr <= 10) return 1;
  if (hptr <= 50) return 2;
  if (hptr <= 100) return 3;
  if (hptr <= 1000) return 4;
  return 5;
}

}  // namespace spacee
