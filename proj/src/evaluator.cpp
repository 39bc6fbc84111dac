#include "spacee/evaluator.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "spacee/error.hpp"

namespace spacee {

std::optional<RankResult> filtered_rank(const ModelParams& params, const SplitDataset& dataset,
                                        const Triple& triple, Direction dir, Rng& rng) {
  if (dataset.has_unseen_entity(triple)) return std::nullopt;

  const EntityId truth = dir == Direction::Head ? triple.head : triple.tail;
  const auto& known = dir == Direction::Head ? dataset.filter_all.heads_of(triple.relation, triple.tail)
                                             : dataset.filter_all.tails_of(triple.head, triple.relation);
  std::vector<EntityId> candidates;
  candidates.reserve(params.shape.n_entities);
  for (EntityId e = 0; e < params.shape.n_entities; ++e) {
    if (e == truth || known.count(e) == 0) candidates.push_back(e);
  }
  const auto scores = score_candidates(params, dir, triple, candidates);
  const double true_score = score(params, dir, triple);

  std::size_t better = 0, ties = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] == truth) continue;
    const double s = scores.values[i];
    if (s < true_score) ++better;
    else if (s == true_score) ++ties;
  }
  RankResult result;
  result.triple = triple;
  result.direction = dir;
  result.num_candidates = candidates.size();
  result.rank = 1 + better + (ties > 0 ? static_cast<std::size_t>(uniform_index(rng, ties + 1)) : 0);
  return result;
}

double mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw std::invalid_argument("mrr of an empty rank list");
  double s = 0.0;
  for (auto r : ranks) s += 1.0 / static_cast<double>(r);
  return s / static_cast<double>(ranks.size());
}

double hits_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (k == 0) throw std::invalid_argument("hits_at_k needs k >= 1");
  if (ranks.empty()) return 0.0;
  auto n = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return static_cast<double>(n) / static_cast<double>(ranks.size());
}

SliceMetrics summarize(std::span<const std::size_t> ranks) {
  SliceMetrics m;
  m.count = ranks.size();
  if (ranks.empty()) return m;
  m.mrr = mrr(ranks);
  m.hits1 = hits_at_k(ranks, 1);
  m.hits3 = hits_at_k(ranks, 3);
  m.hits10 = hits_at_k(ranks, 10);
  return m;
}

EvalReport evaluate(const ModelParams& params, const SplitDataset& dataset, EvalSplit split,
                    const EvalOptions& options) {
  const auto& store = split == EvalSplit::Valid ? dataset.valid : dataset.test;
  if (store.empty()) throw ConfigError("evaluation split is empty");
  if (params.shape.n_entities != dataset.entities.size() ||
      params.shape.n_relations != dataset.relations.size()) {
    throw ConfigError("model shape does not match the dataset vocabularies");
  }
  const auto& triples = store.triples();
  const std::size_t n = triples.size();

  struct PerTriple {
    bool skipped = false;
    RankResult head, tail;
  };
  std::vector<PerTriple> results(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(options.seed ^ static_cast<std::uint64_t>(i));
      auto h = filtered_rank(params, dataset, triples[i], Direction::Head, rng);
      if (!h) {
        results[i].skipped = true;
        continue;
      }
      results[i].head = *h;
      results[i].tail = *filtered_rank(params, dataset, triples[i], Direction::Tail, rng);
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, n));
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }

  const TripleStore& stats_store =
      options.stats_source == StatsSource::AllSplits ? dataset.filter_all : dataset.train;
  std::map<RelationId, RelationCategory> category;
  for (const auto& s : relation_stats(stats_store, options.category_threshold)) {
    category[s.relation] = s.category;
  }

  EvalReport report;
  std::vector<std::size_t> all, heads, tails;
  struct CatRanks {
    std::size_t triples = 0;
    std::vector<std::size_t> head, tail, both;
  };
  std::map<RelationCategory, CatRanks> per_cat;
  std::map<int, std::vector<std::size_t>> per_bucket;
  for (const auto& r : results) {
    if (r.skipped) {
      ++report.skipped_unseen;
      continue;
    }
    ++report.evaluated_triples;
    heads.push_back(r.head.rank);
    tails.push_back(r.tail.rank);
    all.push_back(r.head.rank);
    all.push_back(r.tail.rank);
    // Relations that never occur in the stats store count as 1-1.
    auto it = category.find(r.head.triple.relation);
    auto& cat = per_cat[it == category.end() ? RelationCategory::OneToOne : it->second];
    ++cat.triples;
    cat.head.push_back(r.head.rank);
    cat.tail.push_back(r.tail.rank);
    cat.both.push_back(r.head.rank);
    cat.both.push_back(r.tail.rank);
    per_bucket[hptr_bucket(hptr_of_triple(stats_store, r.head.triple))].push_back(r.head.rank);
    if (options.keep_ranks) {
      report.ranks.push_back(r.head);
      report.ranks.push_back(r.tail);
    }
  }
  report.overall = summarize(all);
  report.head = summarize(heads);
  report.tail = summarize(tails);
  for (const auto& [c, ranks] : per_cat) {
    report.per_category[c] = {ranks.triples, summarize(ranks.head), summarize(ranks.tail),
                              summarize(ranks.both)};
  }
  for (const auto& [b, ranks] : per_bucket) report.per_hptr_bucket[b] = summarize(ranks);
  return report;
}

namespace {

void table_row(std::ostream& out, const std::string& label, const SliceMetrics& m) {
  out << std::left << std::setw(16) << label << std::right << std::setw(8) << m.count
      << std::fixed << std::setprecision(4) << std::setw(9) << m.mrr << std::setw(9) << m.hits1
      << std::setw(9) << m.hits3 << std::setw(9) << m.hits10 << '\n';
  out.unsetf(std::ios::fixed);
}

void flat_slice(std::ostream& out, const std::string& slice, const SliceMetrics& m) {
  out << std::setprecision(10);
  out << "count\t" << slice << '\t' << m.count << '\n';
  out << "mrr\t" << slice << '\t' << m.mrr << '\n';
  out << "hits@1\t" << slice << '\t' << m.hits1 << '\n';
  out << "hits@3\t" << slice << '\t' << m.hits3 << '\n';
  out << "hits@10\t" << slice << '\t' << m.hits10 << '\n';
}

}  // namespace

void write_report_table(std::ostream& out, const EvalReport& report) {
  out << std::left << std::setw(16) << "slice" << std::right << std::setw(8) << "ranks"
      << std::setw(9) << "MRR" << std::setw(9) << "H@1" << std::setw(9) << "H@3" << std::setw(9)
      << "H@10" << '\n';
  table_row(out, "all", report.overall);
  table_row(out, "head", report.head);
  table_row(out, "tail", report.tail);
  for (const auto& [c, m] : report.per_category) {
    const std::string name(category_name(c));
    table_row(out, name + " head", m.head);
    table_row(out, name + " tail", m.tail);
  }
  for (const auto& [b, m] : report.per_hptr_bucket) {
    table_row(out, "hptr#" + std::to_string(b) + " head", m);
  }
  out << "evaluated triples: " << report.evaluated_triples
      << ", skipped (unseen entity): " << report.skipped_unseen << '\n';
}

void write_report_flat(std::ostream& out, const EvalReport& report) {
  flat_slice(out, "all", report.overall);
  flat_slice(out, "head", report.head);
  flat_slice(out, "tail", report.tail);
  for (const auto& [c, m] : report.per_category) {
    const std::string name(category_name(c));
    out << "triples\tcategory:" << name << '\t' << m.triples << '\n';
    flat_slice(out, "category:" + name + ":head", m.head);
    flat_slice(out, "category:" + name + ":tail", m.tail);
    flat_slice(out, "category:" + name, m.both);
  }
  for (const auto& [b, m] : report.per_hptr_bucket) {
    flat_slice(out, "hptr:" + std::to_string(b) + ":head", m);
  }
  out << "evaluated\tall\t" << report.evaluated_triples << '\n';
  out << "skipped_unseen\tall\t" << report.skipped_unseen << '\n';
}

void write_ranks(std::ostream& out, const EvalReport& report, const SplitDataset& dataset) {
  for (const auto& r : report.ranks) {
    out << dataset.entities.name_of(r.triple.head) << '\t'
        << dataset.relations.name_of(r.triple.relation) << '\t'
        << dataset.entities.name_of(r.triple.tail) << '\t' << direction_name(r.direction) << '\t'
        << r.rank << '\n';
  }
}

}  // namespace spacee
