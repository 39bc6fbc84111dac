#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "spacee/error.hpp"
#include "spacee/kg.hpp"
#include "spacee/random.hpp"
#include "test_util.hpp"

using namespace spacee;
using spacee::testing::make_dataset;
using spacee::testing::temp_dir;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

TripleStore random_store(std::size_t n, std::uint64_t seed, std::size_t entities = 12,
                         std::size_t relations = 3) {
  Rng rng(seed);
  TripleStore store;
  while (store.size() < n) {
    store.insert({static_cast<EntityId>(uniform_index(rng, entities)),
                  static_cast<RelationId>(uniform_index(rng, relations)),
                  static_cast<EntityId>(uniform_index(rng, entities))});
  }
  return store;
}

}  // namespace

TEST(Vocabulary, IdsAreDenseAndBijective) {
  Vocabulary v;
  EXPECT_EQ(v.intern("a"), 0u);
  EXPECT_EQ(v.intern("b"), 1u);
  EXPECT_EQ(v.intern("a"), 0u);
  EXPECT_EQ(v.size(), 2u);
  for (std::uint32_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.lookup(v.name_of(i)), i);
  EXPECT_FALSE(v.find("c").has_value());
  EXPECT_THROW(v.lookup("c"), ConfigError);
}

TEST(Vocabulary, HashTracksIdAssignment) {
  Vocabulary a, b;
  a.intern("x");
  a.intern("y");
  b.intern("y");
  b.intern("x");
  EXPECT_NE(a.hash(), b.hash());
  Vocabulary c;
  c.add_with_id(0, "x");
  c.add_with_id(1, "y");
  EXPECT_EQ(a.hash(), c.hash());
  EXPECT_THROW(c.add_with_id(5, "z"), IoError);
}

TEST(TripleStore, RejectsDuplicates) {
  TripleStore s;
  EXPECT_TRUE(s.insert({0, 0, 1}));
  EXPECT_FALSE(s.insert({0, 0, 1}));
  EXPECT_EQ(s.size(), 1u);
  EXPECT_TRUE(s.contains({0, 0, 1}));
  EXPECT_FALSE(s.contains({1, 0, 0}));
}

TEST(TripleStore, ProjectionsMatchTriplesExactly) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto store = random_store(60, seed);
    std::size_t by_hr = 0, by_rt = 0;
    for (const auto& [key, tails] : store.by_hr()) {
      by_hr += tails.size();
      for (auto t : tails) EXPECT_TRUE(store.contains({key.first, key.second, t}));
    }
    for (const auto& [key, heads] : store.by_rt()) {
      by_rt += heads.size();
      for (auto h : heads) EXPECT_TRUE(store.contains({h, key.first, key.second}));
    }
    EXPECT_EQ(by_hr, store.size());
    EXPECT_EQ(by_rt, store.size());
  }
}

TEST(Dataset, LoadsTinyDirectory) {
  auto dir = temp_dir("kg_tiny");
  write_file(dir / "train.txt", "a\tr\tb\nb\tr\ta\na\tr\ta\n");
  write_file(dir / "valid.txt", "");
  write_file(dir / "test.txt", "");
  auto ds = load_dataset(dir);
  EXPECT_EQ(ds.entities.size(), 2u);
  EXPECT_EQ(ds.relations.size(), 1u);
  EXPECT_EQ(ds.train.size(), 3u);
  EXPECT_EQ(ds.filter_all.size(), 3u);
}

TEST(Dataset, IdsFollowFirstAppearanceAcrossSplits) {
  auto dir = temp_dir("kg_order");
  write_file(dir / "train.txt", "c\tr1\td\n");
  write_file(dir / "valid.txt", "a\tr2\tc\n");
  write_file(dir / "test.txt", "e\tr1\tb\n");
  auto ds = load_dataset(dir);
  EXPECT_EQ(ds.entities.names(), (std::vector<std::string>{"c", "d", "a", "e", "b"}));
  EXPECT_EQ(ds.relations.names(), (std::vector<std::string>{"r1", "r2"}));
  EXPECT_EQ(ds.unseen_entities, (std::vector<EntityId>{2, 3, 4}));
  EXPECT_TRUE(ds.has_unseen_entity({3, 0, 4}));
  EXPECT_FALSE(ds.has_unseen_entity({0, 0, 1}));
}

TEST(Dataset, DictionariesOverrideOrder) {
  auto dir = temp_dir("kg_dict");
  write_file(dir / "train.txt", "a\tr\tb\n");
  write_file(dir / "valid.txt", "");
  write_file(dir / "test.txt", "");
  write_file(dir / "entities.dict", "0\tb\n1\ta\n");
  write_file(dir / "relations.dict", "0\tr\n");
  auto ds = load_dataset(dir);
  EXPECT_EQ(ds.entities.lookup("b"), 0u);
  EXPECT_EQ(ds.train.triples()[0], (Triple{1, 0, 0}));
}

TEST(Dataset, MalformedLineReportsFileAndLine) {
  auto dir = temp_dir("kg_bad");
  write_file(dir / "train.txt", "a\tr\tb\na r b\n");
  write_file(dir / "valid.txt", "");
  write_file(dir / "test.txt", "");
  try {
    load_dataset(dir);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("train.txt:2"), std::string::npos) << e.what();
  }
}

TEST(Dataset, MissingFileIsAnIoError) {
  auto dir = temp_dir("kg_missing");
  write_file(dir / "train.txt", "a\tr\tb\n");
  EXPECT_THROW(load_dataset(dir), IoError);
  EXPECT_THROW(load_dataset(dir / "nope"), IoError);
}

TEST(Dataset, DuplicatesWarnAndDeduplicate) {
  auto dir = temp_dir("kg_dup");
  write_file(dir / "train.txt", "a\tr\tb\na\tr\tb\n");
  write_file(dir / "valid.txt", "");
  write_file(dir / "test.txt", "a\tr\tb\n");
  std::ostringstream warn;
  auto ds = load_dataset(dir, &warn);
  EXPECT_EQ(ds.train.size(), 1u);
  EXPECT_EQ(ds.test.size(), 1u);  // kept per split
  EXPECT_EQ(ds.filter_all.size(), 1u);
  EXPECT_NE(warn.str().find("duplicate"), std::string::npos);
}

TEST(Dataset, SaveThenLoadRoundTrips) {
  auto ds = make_dataset({{"x", "r", "y"}, {"y", "s", "z"}, {"z", "r", "x"}}, {{"x", "s", "z"}},
                         {{"w", "r", "y"}});
  auto dir = temp_dir("kg_roundtrip");
  save_dataset(ds, dir);
  auto back = load_dataset(dir);
  EXPECT_EQ(back.entities, ds.entities);
  EXPECT_EQ(back.relations, ds.relations);
  EXPECT_EQ(back.train.triples(), ds.train.triples());
  EXPECT_EQ(back.valid.triples(), ds.valid.triples());
  EXPECT_EQ(back.test.triples(), ds.test.triples());
  EXPECT_EQ(back.unseen_entities, ds.unseen_entities);
}

TEST(Dataset, FilterAllIsTheUnionOfSplits) {
  auto ds = make_dataset({{"a", "r", "b"}, {"b", "r", "c"}}, {{"a", "r", "c"}, {"a", "r", "b"}},
                         {{"c", "r", "a"}});
  EXPECT_EQ(ds.filter_all.size(), 4u);
  for (const auto* split : {&ds.train, &ds.valid, &ds.test}) {
    for (const auto& t : split->triples()) EXPECT_TRUE(ds.filter_all.contains(t));
  }
}

TEST(RelationStats, SpotValues) {
  TripleStore one;
  one.insert({0, 0, 1});
  auto s = relation_stats(one);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].tphr, 1.0);
  EXPECT_DOUBLE_EQ(s[0].hptr, 1.0);
  EXPECT_EQ(s[0].category, RelationCategory::OneToOne);

  TripleStore fan;
  fan.insert({0, 0, 1});
  fan.insert({0, 0, 2});
  s = relation_stats(fan, 1.5);
  EXPECT_DOUBLE_EQ(s[0].tphr, 2.0);
  EXPECT_DOUBLE_EQ(s[0].hptr, 1.0);
  EXPECT_EQ(s[0].category, RelationCategory::OneToMany);
  EXPECT_EQ(category_name(s[0].category), "1-N");
}

TEST(RelationStats, ExcludesEmptyRelationsAndRejectsBadThreshold) {
  TripleStore store;
  store.insert({0, 2, 1});
  auto s = relation_stats(store);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].relation, 2u);
  EXPECT_THROW(relation_stats(store, 1.0), ConfigError);
}

TEST(RelationStats, CategoriesFollowTheThresholdTable) {
  EXPECT_EQ(categorize(1.0, 1.0, 1.5), RelationCategory::OneToOne);
  EXPECT_EQ(categorize(1.5, 1.0, 1.5), RelationCategory::OneToMany);
  EXPECT_EQ(categorize(1.0, 1.5, 1.5), RelationCategory::ManyToOne);
  EXPECT_EQ(categorize(2.0, 3.0, 1.5), RelationCategory::ManyToMany);
}

TEST(RelationStats, PropertiesOnRandomStores) {
  auto rank = [](RelationCategory c) {
    // Number of "many" sides.
    return c == RelationCategory::OneToOne ? 0 : c == RelationCategory::ManyToMany ? 2 : 1;
  };
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto store = random_store(80, seed, 15, 4);
    std::set<RelationId> present;
    for (const auto& t : store.triples()) present.insert(t.relation);
    const auto low = relation_stats(store, 1.2);
    const auto high = relation_stats(store, 2.5);
    ASSERT_EQ(low.size(), present.size());
    for (std::size_t i = 0; i < low.size(); ++i) {
      EXPECT_GE(low[i].tphr, 1.0);
      EXPECT_GE(low[i].hptr, 1.0);
      EXPECT_EQ(low[i].category, categorize(low[i].tphr, low[i].hptr, 1.2));
      // Raising the threshold can only remove "many" sides.
      EXPECT_LE(rank(high[i].category), rank(low[i].category));
      if (low[i].category == RelationCategory::OneToOne) {
        EXPECT_EQ(high[i].category, RelationCategory::OneToOne);
      }
    }
  }
}

TEST(Hptr, SpotValues) {
  TripleStore store;
  store.insert({0, 0, 2});
  EXPECT_EQ(hptr_of_triple(store, {0, 0, 2}), 1u);
  store.insert({1, 0, 2});
  EXPECT_EQ(hptr_of_triple(store, {0, 0, 2}), 2u);
  EXPECT_EQ(hptr_of_triple(store, {0, 1, 2}), 0u);
}

TEST(Hptr, MatchesBruteForceScan) {
  const auto store = random_store(100, 7, 10, 2);
  for (const auto& q : store.triples()) {
    std::size_t count = 0;
    for (const auto& t : store.triples()) count += t.relation == q.relation && t.tail == q.tail;
    EXPECT_EQ(hptr_of_triple(store, q), count);
  }
}

TEST(Hptr, BucketBoundaries) {
  EXPECT_EQ(hptr_bucket(0), 1);
  EXPECT_EQ(hptr_bucket(4), 1);
  EXPECT_EQ(hptr_bucket(10), 1);
  EXPECT_EQ(hptr_bucket(11), 2);
  EXPECT_EQ(hptr_bucket(28), 2);
  EXPECT_EQ(hptr_bucket(50), 2);
  EXPECT_EQ(hptr_bucket(51), 3);
  EXPECT_EQ(hptr_bucket(74), 3);
  EXPECT_EQ(hptr_bucket(100), 3);
  EXPECT_EQ(hptr_bucket(101), 4);
  EXPECT_EQ(hptr_bucket(273), 4);
  EXPECT_EQ(hptr_bucket(1000), 4);
  EXPECT_EQ(hptr_bucket(1001), 5);
  EXPECT_EQ(hptr_bucket(46678), 5);
  EXPECT_EQ(hptr_bucket(5000000), 5);
}
