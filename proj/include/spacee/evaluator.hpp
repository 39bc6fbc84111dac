#pragma once
// Filtered link-prediction ranking under the random tie protocol, plus
// MRR / Hits@k with relation-category and hptr-bucket breakdowns.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "spacee/kg.hpp"
#include "spacee/model.hpp"
#include "spacee/random.hpp"

namespace spacee {

struct RankResult {
  Triple triple;
  Direction direction = Direction::Head;
  std::size_t rank = 0;            // 1-based
  std::size_t num_candidates = 0;  // after filtering, including the true entity
};

// Ranks the true entity among all entities after removing every other entity
// that forms a known triple (dataset.filter_all). Lower score ranks higher;
// the true entity is placed uniformly at random among exact ties using `rng`
// (no draw is made when there are no ties). Returns nullopt for a triple with
// an entity unseen in train.
std::optional<RankResult> filtered_rank(const ModelParams& params, const SplitDataset& dataset,
                                        const Triple& triple, Direction dir, Rng& rng);

double mrr(std::span<const std::size_t> ranks);
double hits_at_k(std::span<const std::size_t> ranks, std::size_t k);

struct SliceMetrics {
  std::size_t count = 0;  // number of ranks
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
};

SliceMetrics summarize(std::span<const std::size_t> ranks);

struct CategoryMetrics {
  std::size_t triples = 0;
  SliceMetrics head;
  SliceMetrics tail;
  SliceMetrics both;
};

enum class EvalSplit { Valid, Test };

// Which store relation categories and hptr buckets are computed from.
enum class StatsSource { AllSplits, TrainOnly };

struct EvalOptions {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  double category_threshold = kDefaultCategoryThreshold;
  StatsSource stats_source = StatsSource::AllSplits;
  bool keep_ranks = false;
};

struct EvalReport {
  SliceMetrics overall;  // head and tail ranks pooled
  SliceMetrics head;
  SliceMetrics tail;
  std::map<RelationCategory, CategoryMetrics> per_category;
  std::map<int, SliceMetrics> per_hptr_bucket;  // head-prediction ranks only
  std::size_t evaluated_triples = 0;
  std::size_t skipped_unseen = 0;
  std::vector<RankResult> ranks;  // filled when keep_ranks
};

// Each triple i draws ties from its own stream seeded with seed ^ i, so the
// result does not depend on the worker count.
EvalReport evaluate(const ModelParams& params, const SplitDataset& dataset, EvalSplit split,
                    const EvalOptions& options = {});

void write_report_table(std::ostream& out, const EvalReport& report);
// "metric<TAB>slice<TAB>value" lines.
void write_report_flat(std::ostream& out, const EvalReport& report);
// "head<TAB>relation<TAB>tail<TAB>direction<TAB>rank" lines.
void write_ranks(std::ostream& out, const EvalReport& report, const SplitDataset& dataset);

}  // namespace spacee
