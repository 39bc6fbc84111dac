#include "spacee/synthetic.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "spacee/config_file.hpp"
#include "spacee/error.hpp"
#include "spacee/random.hpp"

namespace spacee {

std::string_view pattern_kind_name(PatternKind k) {
  switch (k) {
    case PatternKind::Symmetric: return "symmetric";
    case PatternKind::SkewSymmetric: return "skew-symmetric";
    case PatternKind::InversePair: return "inverse-pair";
    case PatternKind::Composition: return "composition";
    case PatternKind::FanIn: return "fan-in";
    case PatternKind::FanOut: return "fan-out";
  }
  return "?";
}

PatternKind parse_pattern_kind(std::string_view name) {
  for (auto k : {PatternKind::Symmetric, PatternKind::SkewSymmetric, PatternKind::InversePair,
                 PatternKind::Composition, PatternKind::FanIn, PatternKind::FanOut}) {
    if (pattern_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown pattern kind '" + std::string(name) + "'");
}

namespace {

std::size_t parse_count(const std::string& value, const std::string& what) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("invalid count for " + what + ": '" + value + "'");
  }
}

std::size_t expected_relations(PatternKind k) {
  switch (k) {
    case PatternKind::Symmetric:
    case PatternKind::SkewSymmetric: return 1;
    case PatternKind::InversePair: return 2;
    case PatternKind::Composition: return 3;
    default: return 0;  // fan patterns take 1 or 2
  }
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  SyntheticSpec spec;
  for (const auto& e : parse_key_values(text)) {
    if (e.key == "n_entities") {
      spec.n_entities = parse_count(e.value, e.key);
    } else if (e.key == "seed") {
      spec.seed = parse_count(e.value, e.key);
    } else if (e.key == "block_size") {
      spec.block_size = parse_count(e.value, e.key);
    } else if (e.key == "valid_fraction" || e.key == "test_fraction") {
      double v = 0;
      try {
        v = std::stod(e.value);
      } catch (const std::exception&) {
        throw ConfigError("invalid " + e.key + ": '" + e.value + "'");
      }
      (e.key == "valid_fraction" ? spec.valid_fraction : spec.test_fraction) = v;
    } else if (e.key == "pattern") {
      auto words = split_words(e.value);
      if (words.empty()) throw ConfigError("line " + std::to_string(e.line) + ": empty pattern");
      PatternSpec p;
      p.kind = parse_pattern_kind(words[0]);
      for (std::size_t i = 1; i < words.size(); ++i) {
        auto eq = words[i].find('=');
        if (eq == std::string::npos) {
          p.relations.push_back(words[i]);
          continue;
        }
        auto key = words[i].substr(0, eq);
        auto val = words[i].substr(eq + 1);
        if (key == "edges") p.edges = parse_count(val, key);
        else if (key == "groups") p.groups = parse_count(val, key);
        else if (key == "fan") p.fan = parse_count(val, key);
        else throw ConfigError("line " + std::to_string(e.line) + ": unknown pattern option '" + key + "'");
      }
      spec.patterns.push_back(std::move(p));
    } else {
      throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
  }
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  return parse_synthetic_spec(read_text_file(path));
}

namespace {

class Builder {
 public:
  // Returns the index of `t`, adding it if new.
  std::size_t add(const Triple& t) {
    auto [it, inserted] = index_.emplace(t, triples.size());
    if (inserted) {
      triples.push_back(t);
      support.emplace_back();
    }
    return it->second;
  }

  void mirror(std::size_t a, std::size_t b) {
    if (a == b) return;
    support[a] = {b};
    support[b] = {a};
  }

  std::vector<Triple> triples;
  std::vector<std::vector<std::size_t>> support;

 private:
  std::map<Triple, std::size_t> index_;
};

// `count` distinct pairs (a, b), a != b. Unordered pairs are returned with a < b.
std::vector<std::pair<EntityId, EntityId>> sample_pairs(std::size_t n, std::size_t count,
                                                        bool ordered, Rng& rng) {
  const std::size_t max_pairs = ordered ? n * (n - 1) : n * (n - 1) / 2;
  if (n < 2 || count > max_pairs) {
    throw ConfigError("infeasible pattern: " + std::to_string(count) + " edges requested but only " +
                      std::to_string(n < 2 ? 0 : max_pairs) + " possible");
  }
  std::vector<std::pair<EntityId, EntityId>> out;
  if (count * 2 > max_pairs) {
    for (EntityId a = 0; a < n; ++a) {
      for (EntityId b = ordered ? 0 : a + 1; b < n; ++b) {
        if (a != b) out.emplace_back(a, b);
      }
    }
    shuffle_in_place(std::span(out), rng);
    out.resize(count);
    return out;
  }
  std::set<std::pair<EntityId, EntityId>> seen;
  while (out.size() < count) {
    auto a = static_cast<EntityId>(uniform_index(rng, n));
    auto b = static_cast<EntityId>(uniform_index(rng, n));
    if (a == b) continue;
    if (!ordered && a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) out.emplace_back(a, b);
  }
  return out;
}

// Each of `groups` hubs gets exactly `fan` distinct spokes (never the hub itself).
// Spokes are disjoint across hubs whenever the entity count allows it.
std::vector<std::pair<EntityId, std::vector<EntityId>>> sample_fans(std::size_t n, std::size_t groups,
                                                                    std::size_t fan, Rng& rng) {
  if (groups == 0 || fan == 0) throw ConfigError("fan patterns need groups > 0 and fan > 0");
  if (groups > n || fan + 1 > n) {
    throw ConfigError("infeasible fan pattern: groups=" + std::to_string(groups) +
                      " fan=" + std::to_string(fan) + " over " + std::to_string(n) + " entities");
  }
  std::vector<EntityId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle_in_place(std::span(perm), rng);
  std::vector<std::pair<EntityId, std::vector<EntityId>>> out;
  const bool disjoint = groups + groups * fan <= n;
  std::size_t next = groups;
  for (std::size_t g = 0; g < groups; ++g) {
    EntityId hub = perm[g];
    std::vector<EntityId> spokes;
    if (disjoint) {
      spokes.assign(perm.begin() + static_cast<std::ptrdiff_t>(next),
                    perm.begin() + static_cast<std::ptrdiff_t>(next + fan));
      next += fan;
    } else {
      std::set<EntityId> chosen;
      while (chosen.size() < fan) {
        auto e = static_cast<EntityId>(uniform_index(rng, n));
        if (e != hub) chosen.insert(e);
      }
      spokes.assign(chosen.begin(), chosen.end());
    }
    out.emplace_back(hub, std::move(spokes));
  }
  return out;
}

void emit_pattern(const PatternSpec& p, const std::vector<RelationId>& rel, std::size_t n,
                  Builder& b, Rng& rng) {
  switch (p.kind) {
    case PatternKind::Symmetric: {
      for (auto [x, y] : sample_pairs(n, p.edges, false, rng)) {
        b.mirror(b.add({x, rel[0], y}), b.add({y, rel[0], x}));
      }
      break;
    }
    case PatternKind::SkewSymmetric: {
      // Orienting every pair along a random ranking keeps the relation acyclic.
      std::vector<std::size_t> rank(n);
      std::iota(rank.begin(), rank.end(), 0);
      shuffle_in_place(std::span(rank), rng);
      for (auto [x, y] : sample_pairs(n, p.edges, false, rng)) {
        if (rank[x] > rank[y]) std::swap(x, y);
        b.add({x, rel[0], y});
      }
      break;
    }
    case PatternKind::InversePair: {
      for (auto [x, y] : sample_pairs(n, p.edges, true, rng)) {
        b.mirror(b.add({x, rel[0], y}), b.add({y, rel[1], x}));
      }
      break;
    }
    case PatternKind::Composition: {
      if (n < 2 || p.edges > n * (n - 1) * (n - 1)) {
        throw ConfigError("infeasible composition pattern: " + std::to_string(p.edges) + " chains");
      }
      std::set<std::tuple<EntityId, EntityId, EntityId>> chains;
      std::map<EntityId, std::set<EntityId>> first, second;
      while (chains.size() < p.edges) {
        auto x = static_cast<EntityId>(uniform_index(rng, n));
        auto y = static_cast<EntityId>(uniform_index(rng, n));
        auto z = static_cast<EntityId>(uniform_index(rng, n));
        if (x == y || y == z) continue;
        if (!chains.emplace(x, y, z).second) continue;
        first[x].insert(y);
        second[y].insert(z);
      }
      for (const auto& [x, ys] : first) {
        for (auto y : ys) b.add({x, rel[0], y});
      }
      for (const auto& [y, zs] : second) {
        for (auto z : zs) b.add({y, rel[1], z});
      }
      // Close r3 over every r1/r2 chain, not just the planted ones.
      for (const auto& [x, ys] : first) {
        for (auto y : ys) {
          auto it = second.find(y);
          if (it == second.end()) continue;
          for (auto z : it->second) {
            auto idx = b.add({x, rel[2], z});
            if (b.support[idx].empty()) {
              b.support[idx] = {b.add({x, rel[0], y}), b.add({y, rel[1], z})};
            }
          }
        }
      }
      break;
    }
    case PatternKind::FanIn:
    case PatternKind::FanOut: {
      const bool in = p.kind == PatternKind::FanIn;
      for (const auto& [hub, spokes] : sample_fans(n, p.groups, p.fan, rng)) {
        for (auto s : spokes) {
          Triple fwd = in ? Triple{s, rel[0], hub} : Triple{hub, rel[0], s};
          auto i = b.add(fwd);
          if (rel.size() == 2) b.mirror(i, b.add({fwd.tail, rel[1], fwd.head}));
        }
      }
      break;
    }
  }
}

// Block X owns entities X*bs .. X*bs+bs-1; every unit triple (X, r, Y) becomes
// all bs*bs entity triples between the two blocks. Supports carry over: a
// mirror maps (x_i, y_j) to (y_j, x_i), a chain goes through y_{(i+j) mod bs}.
Builder expand_blocks(const Builder& units, std::size_t bs) {
  if (bs == 1) return units;
  Builder out;
  std::vector<std::size_t> base(units.triples.size());
  for (std::size_t u = 0; u < units.triples.size(); ++u) {
    const auto& t = units.triples[u];
    base[u] = out.triples.size();
    for (std::size_t i = 0; i < bs; ++i) {
      for (std::size_t j = 0; j < bs; ++j) {
        out.add({static_cast<EntityId>(t.head * bs + i), t.relation, static_cast<EntityId>(t.tail * bs + j)});
      }
    }
  }
  for (std::size_t u = 0; u < units.triples.size(); ++u) {
    const auto& sup = units.support[u];
    for (std::size_t i = 0; i < bs; ++i) {
      for (std::size_t j = 0; j < bs; ++j) {
        auto& dst = out.support[base[u] + i * bs + j];
        if (sup.size() == 1) {
          dst = {base[sup[0]] + j * bs + i};
        } else if (sup.size() == 2) {
          const std::size_t k = (i + j) % bs;
          dst = {base[sup[0]] + i * bs + k, base[sup[1]] + k * bs + j};
        }
      }
    }
  }
  return out;
}

}  // namespace

SplitDataset generate_synthetic(const SyntheticSpec& spec) {
  const std::size_t n = spec.n_entities;
  if (n < 2) throw ConfigError("synthetic spec needs at least 2 entities");
  if (spec.patterns.empty()) throw ConfigError("synthetic spec has no patterns");
  if (spec.valid_fraction < 0 || spec.test_fraction < 0 ||
      spec.valid_fraction + spec.test_fraction >= 1.0) {
    throw ConfigError("valid_fraction + test_fraction must lie in [0, 1)");
  }

  const std::size_t bs = spec.block_size;
  if (bs == 0 || n % bs != 0) throw ConfigError("block_size must be positive and divide n_entities");
  const std::size_t n_units = n / bs;
  if (n_units < 2) throw ConfigError("synthetic spec needs at least 2 blocks");

  SplitDataset ds;
  for (std::size_t i = 0; i < n; ++i) ds.entities.intern("e" + std::to_string(i));

  Rng rng(spec.seed);
  Builder units;
  for (const auto& p : spec.patterns) {
    const bool fan = p.kind == PatternKind::FanIn || p.kind == PatternKind::FanOut;
    const std::size_t want = expected_relations(p.kind);
    if (fan ? (p.relations.empty() || p.relations.size() > 2) : p.relations.size() != want) {
      throw ConfigError(std::string(pattern_kind_name(p.kind)) + " pattern has the wrong number of relations");
    }
    if (!fan && p.edges == 0) {
      throw ConfigError(std::string(pattern_kind_name(p.kind)) + " pattern needs edges > 0");
    }
    std::vector<RelationId> rel;
    for (const auto& name : p.relations) {
      if (ds.relations.find(name)) throw ConfigError("relation '" + name + "' used by two patterns");
      rel.push_back(ds.relations.intern(name));
    }
    if (std::set<RelationId>(rel.begin(), rel.end()).size() != rel.size()) {
      throw ConfigError("pattern repeats a relation name");
    }
    emit_pattern(p, rel, n_units, units, rng);
  }

  const Builder builder = expand_blocks(units, bs);

  // Pattern-aware hold-out.
  const std::size_t total = builder.triples.size();
  const auto n_valid = static_cast<std::size_t>(static_cast<double>(total) * spec.valid_fraction);
  const auto n_test = static_cast<std::size_t>(static_cast<double>(total) * spec.test_fraction);
  enum class Slot { Train, Valid, Test };
  std::vector<Slot> slot(total, Slot::Train);
  std::vector<bool> locked(total, false);
  std::vector<std::size_t> train_degree(n, 0);
  for (const auto& t : builder.triples) {
    ++train_degree[t.head];
    ++train_degree[t.tail];
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  shuffle_in_place(std::span(order), rng);

  std::size_t valid_count = 0, test_count = 0;
  for (auto i : order) {
    if (valid_count == n_valid && test_count == n_test) break;
    if (locked[i]) continue;
    const auto& t = builder.triples[i];
    const auto& sup = builder.support[i];
    if (std::any_of(sup.begin(), sup.end(), [&](std::size_t j) { return slot[j] != Slot::Train; })) {
      continue;
    }
    const std::size_t needed = t.head == t.tail ? 3 : 2;
    if (train_degree[t.head] < needed || train_degree[t.tail] < 2) continue;
    --train_degree[t.head];
    --train_degree[t.tail];
    slot[i] = valid_count < n_valid ? Slot::Valid : Slot::Test;
    (slot[i] == Slot::Valid ? valid_count : test_count) += 1;
    locked[i] = true;
    for (auto j : sup) locked[j] = true;
  }

  for (std::size_t i = 0; i < total; ++i) {
    auto& store = slot[i] == Slot::Train ? ds.train : slot[i] == Slot::Valid ? ds.valid : ds.test;
    store.insert(builder.triples[i]);
  }
  finalize_dataset(ds);
  return ds;
}

}  // namespace spacee
