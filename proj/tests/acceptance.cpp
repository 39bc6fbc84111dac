// Acceptance run: one PASS/FAIL/SKIP line per criterion, non-zero exit if any
// criterion fails. Dataset-dependent checks read SPACEE_FB15K237_DIR and
// SPACEE_YAGO3_10_DIR and are skipped when those are unset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "spacee/baselines.hpp"
#include "spacee/evaluator.hpp"
#include "spacee/patterns.hpp"
#include "spacee/synthetic.hpp"
#include "spacee/trainer.hpp"
#include "test_util.hpp"

using namespace spacee;
using spacee::testing::check_gradient;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Fail;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ModelParams scaled_params(const ModelShape& shape, std::uint64_t seed, double scale) {
  auto m = init_params(shape, seed);
  for (auto* t : spacee::testing::tables(m)) {
    for (double& v : t->values()) v *= scale;
  }
  return m;
}

// Relative errors are |a - n| / max(floor, |a|, |n|).
constexpr double kGradFloor = 1e-3;

Outcome criterion_gradients() {
  Stopwatch clock;
  Rng rng(2024);
  double worst_d = 0, worst_f = 0, worst_loss = 0, worst_reg = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t p = 2 + uniform_index(rng, 5), q = 2 + uniform_index(rng, 5);
    const std::size_t n_e = 6, n_r = 2;
    auto params = scaled_params(ModelShape{ModelKind::SpaceE, n_e, n_r, p, q}, 1000 + inst, 4.0);
    const Triple t{0, 1, 1};
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    for (std::size_t e = 0; e < n_e; ++e) rows.emplace_back(0, e);
    rows.emplace_back(1, 1);
    rows.emplace_back(2, 1);

    for (auto dir : {Direction::Head, Direction::Tail}) {
      GradientSet g(params.shape);
      accumulate_score_gradient(params, dir, t, 1.0, g);
      const auto res = check_gradient(
          params, g, rows, [&](const ModelParams& m) { return score(m, dir, t); }, 1e-5, kGradFloor);
      (dir == Direction::Head ? worst_d : worst_f) =
          std::max(dir == Direction::Head ? worst_d : worst_f, res.max_rel_error);
    }

    TrainConfig cfg;
    cfg.p = p;
    cfg.q = q;
    cfg.gamma = 1.0 + 8.0 * uniform_unit(rng);
    cfg.alpha = uniform_unit(rng);
    const std::vector<EntityId> nh{2, 3, 4}, nt{3, 4, 5};
    const auto loss = triple_loss(params, t, nh, nt, cfg);
    const auto wh = spacee::testing::weights_for(params, Direction::Head, t, nh, cfg);
    const auto wt = spacee::testing::weights_for(params, Direction::Tail, t, nt, cfg);
    const auto lres = check_gradient(
        params, loss.grads, rows,
        [&](const ModelParams& m) { return spacee::testing::frozen_loss(m, t, nh, nt, wh, wt, cfg.gamma); },
        1e-5, kGradFloor);
    worst_loss = std::max(worst_loss, lres.max_rel_error);

    Matrix r(q, q, params.relation_fwd.row(0));
    const auto reg = ortho_reg(r);
    for (std::size_t i = 0; i < q * q; ++i) {
      const double saved = r.values()[i];
      r.values()[i] = saved + 1e-5;
      const double up = ortho_reg(r).value;
      r.values()[i] = saved - 1e-5;
      const double down = ortho_reg(r).value;
      r.values()[i] = saved;
      const double numeric = (up - down) / 2e-5;
      const double a = reg.gradient.values()[i];
      worst_reg = std::max(worst_reg, std::abs(a - numeric) / std::max({kGradFloor, std::abs(a), std::abs(numeric)}));
    }
  }
  const double secs = clock.seconds();
  const bool ok = worst_d < 1e-5 && worst_f < 1e-5 && worst_loss < 1e-4 && worst_reg < 1e-5 && secs < 10.0;
  return {ok ? Status::Pass : Status::Fail,
          format("max rel err d %.2e, f %.2e, loss %.2e, ortho_reg %.2e over 100 instances in %.2f s", worst_d,
                 worst_f, worst_loss, worst_reg, secs)};
}

Outcome criterion_rotate_subsumption() {
  Stopwatch clock;
  Rng rng(7);
  NormalSampler normal(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + uniform_index(rng, 16);
    std::vector<Complex> h(k), r(k), t(k);
    for (std::size_t i = 0; i < k; ++i) {
      h[i] = {normal(rng), normal(rng)};
      t[i] = {normal(rng), normal(rng)};
      r[i] = std::polar(1.0, 2.0 * std::numbers::pi * uniform_unit(rng));
    }
    ModelParams m(ModelShape{ModelKind::SpaceE, 2, 1, 2 * k, 2 * k});
    const Matrix hb = complex_to_block_diag(h), tb = complex_to_block_diag(t), rb = complex_to_block_diag(r);
    std::copy(hb.values().begin(), hb.values().end(), m.entity.row(0).begin());
    std::copy(tb.values().begin(), tb.values().end(), m.entity.row(1).begin());
    std::copy(rb.values().begin(), rb.values().end(), m.relation_fwd.row(0).begin());
    const double rs = rotate_score(h, r, t);
    const double expect = 2.0 * rs * rs;
    const double d = score_head(m, 0, 0, 1);
    worst = std::max(worst, std::abs(d - expect) / std::max(expect, 1e-300));
  }
  const double secs = clock.seconds();
  return {worst < 1e-9 && secs < 5.0 ? Status::Pass : Status::Fail,
          format("max rel err %.2e over 1000 triples (K <= 16) in %.2f s", worst, secs)};
}

// Head score written out from the raw rows: ||H R - T||^2 (or ||T R_rev - H||^2).
double raw_score(const ModelParams& m, Direction dir, const Triple& t) {
  const std::size_t p = m.shape.p, q = m.shape.q;
  const auto src = m.entity.row(dir == Direction::Head ? t.head : t.tail);
  const auto dst = m.entity.row(dir == Direction::Head ? t.tail : t.head);
  const auto rel = dir == Direction::Head ? m.relation_fwd.row(t.relation) : m.relation_rev.row(t.relation);
  double total = 0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      double v = -dst[i * q + j];
      for (std::size_t k = 0; k < q; ++k) v += src[i * q + k] * rel[k * q + j];
      total += v * v;
    }
  }
  return total;
}

Outcome criterion_oracle() {
  Stopwatch clock;
  Rng rng(30);
  SplitDataset ds;
  for (int e = 0; e < 30; ++e) ds.entities.intern("e" + std::to_string(e));
  for (int r = 0; r < 3; ++r) ds.relations.intern("r" + std::to_string(r));
  TripleStore all;
  std::size_t added = 0;
  while (added < 150) {
    const Triple t{static_cast<EntityId>(uniform_index(rng, 30)), static_cast<RelationId>(uniform_index(rng, 3)),
                   static_cast<EntityId>(uniform_index(rng, 30))};
    if (!all.insert(t)) continue;
    (added % 5 == 0 ? ds.test : added % 5 == 1 ? ds.valid : ds.train).insert(t);
    ++added;
  }
  finalize_dataset(ds);
  const auto params = init_params(ModelShape{ModelKind::SpaceE, 30, 3, 3, 4}, 31);

  std::size_t compared = 0, mismatches = 0;
  for (std::size_t i = 0; i < ds.test.size(); ++i) {
    const Triple& t = ds.test.triples()[i];
    if (ds.has_unseen_entity(t)) continue;
    for (auto dir : {Direction::Head, Direction::Tail}) {
      const double truth = raw_score(params, dir, t);
      std::size_t better = 0, ties = 0;
      for (EntityId e = 0; e < 30; ++e) {
        Triple c = t;
        (dir == Direction::Head ? c.head : c.tail) = e;
        if (c == t) continue;
        bool known = false;
        for (const auto* split : {&ds.train, &ds.valid, &ds.test}) known |= split->contains(c);
        if (known) continue;
        const double s = raw_score(params, dir, c);
        better += s < truth;
        ties += s == truth;
      }
      Rng eval_rng(i);
      const auto r = filtered_rank(params, ds, t, dir, eval_rng);
      ++compared;
      if (ties != 0 || !r || r->rank != better + 1) ++mismatches;
    }
  }
  const double secs = clock.seconds();
  return {mismatches == 0 && compared > 0 && secs < 5.0 ? Status::Pass : Status::Fail,
          format("%zu ranks compared, %zu mismatches, in %.2f s", compared, mismatches, secs)};
}

Outcome criterion_ties() {
  // Three entities, constant scores; the third candidate is a known triple and
  // gets filtered, leaving the answer tied with exactly one competitor.
  const auto ds = spacee::testing::make_dataset({{"a", "r", "b"}, {"a", "r", "x"}, {"b", "r", "a"}}, {},
                                                {{"a", "r", "a"}});
  const ModelParams params(ModelShape{ModelKind::SpaceE, 3, 1, 2, 2});
  const Triple t = ds.test.triples()[0];
  double total = 0;
  std::size_t candidates = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng rng(seed);
    const auto r = filtered_rank(params, ds, t, Direction::Head, rng);
    total += static_cast<double>(r->rank);
    candidates = r->num_candidates;
  }
  const double mean = total / 10000.0;
  return {mean >= 1.47 && mean <= 1.53 && candidates == 2 ? Status::Pass : Status::Fail,
          format("mean rank %.4f over 10^4 seeds with %zu tied candidates", mean, candidates)};
}

constexpr const char* kPatternSpec = R"(n_entities = 200
seed = 11
pattern = symmetric sym edges=300
pattern = skew-symmetric skew edges=600
pattern = inverse-pair inv_a inv_b edges=600
pattern = composition comp_a comp_b comp_ab edges=620
)";

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Tail-prediction (or head-prediction) ranks restricted to one relation.
std::vector<std::size_t> ranks_of(const EvalReport& rep, RelationId r, std::optional<Direction> dir) {
  std::vector<std::size_t> out;
  for (const auto& rr : rep.ranks) {
    if (rr.triple.relation == r && (!dir || rr.direction == *dir)) out.push_back(rr.rank);
  }
  return out;
}

TrainConfig desk_config() {
  TrainConfig cfg;
  cfg.p = 10;
  cfg.q = 10;
  cfg.batch_size = 256;
  cfg.negatives = 32;
  cfg.lr = 0.01;
  cfg.lambda = 0.05;
  cfg.alpha = 1.0;
  cfg.seed = 1;
  return cfg;
}

Outcome criterion_patterns() {
  Stopwatch clock;
  const auto ds = generate_synthetic(parse_synthetic_spec(kPatternSpec));
  std::size_t smallest = SIZE_MAX;
  for (const auto& s : relation_stats(ds.filter_all)) {
    std::size_t n = 0;
    for (const auto& t : ds.filter_all.triples()) n += t.relation == s.relation;
    smallest = std::min(smallest, n);
  }
  auto cfg = desk_config();
  cfg.gamma = 12.0;
  cfg.steps = 4000;
  const auto result = train(ds, cfg);
  const auto& params = result.checkpoint.params;
  auto id = [&](const char* name) { return *ds.relations.find(name); };
  auto rel = [&](const char* name) { return relation_matrix(params, id(name), false); };

  const double sym = symmetry_deviation(rel("sym"));
  const double skew = symmetry_deviation(rel("skew"));

  const std::size_t n_r = ds.relations.size();
  std::vector<Matrix> all;
  for (RelationId r = 0; r < n_r; ++r) all.push_back(relation_matrix(params, r, false));
  const RelationId ia = id("inv_a"), ib = id("inv_b");
  std::vector<double> unpaired;
  for (RelationId a = 0; a < n_r; ++a) {
    for (RelationId b = 0; b < n_r; ++b) {
      if (a == b || (a == ia && b == ib) || (a == ib && b == ia)) continue;
      unpaired.push_back(inversion_deviation(all[a], all[b]));
    }
  }
  const double inv = inversion_deviation(rel("inv_a"), rel("inv_b"));
  const double inv_med = median(unpaired);

  const RelationId c1 = id("comp_a"), c2 = id("comp_b"), c3 = id("comp_ab");
  Rng rng(5);
  std::vector<double> random_triples;
  while (random_triples.size() < 60) {
    const auto a = static_cast<RelationId>(uniform_index(rng, n_r));
    const auto b = static_cast<RelationId>(uniform_index(rng, n_r));
    const auto c = static_cast<RelationId>(uniform_index(rng, n_r));
    if (a == b || b == c || a == c || (a == c1 && b == c2 && c == c3)) continue;
    random_triples.push_back(composition_deviation(all[a], all[b], all[c]));
  }
  const double comp = composition_deviation(all[c1], all[c2], all[c3]);
  const double comp_med = median(random_triples);

  EvalOptions opts;
  opts.keep_ranks = true;
  const auto rep = evaluate(params, ds, EvalSplit::Test, opts);
  const auto sym_ranks = ranks_of(rep, id("sym"), std::nullopt);
  const double sym_mrr = mrr(sym_ranks);
  const double secs = clock.seconds();

  const bool a_ok = sym < 0.5 * skew, b_ok = inv < 0.5 * inv_med, c_ok = comp < 0.5 * comp_med;
  const bool d_ok = sym_mrr > 0.9;
  const bool ok = a_ok && b_ok && c_ok && d_ok && secs <= 600.0 && smallest >= 500;
  return {ok ? Status::Pass : Status::Fail,
          format("(a) sym %.3f vs skew %.3f [%s]; (b) inv %.3f vs median %.3f [%s]; (c) comp %.3f vs median %.3f "
                 "[%s]; (d) symmetric test MRR %.3f [%s]; min triples/relation %zu; %.0f s",
                 sym, skew, a_ok ? "ok" : "no", inv, inv_med, b_ok ? "ok" : "no", comp, comp_med,
                 c_ok ? "ok" : "no", sym_mrr, d_ok ? "ok" : "no", smallest, secs)};
}

constexpr const char* kFanSpec = R"(n_entities = 400
seed = 5
pattern = fan-in member_of has_member groups=30 fan=10
pattern = fan-in paired_with groups=60 fan=1
)";

Outcome criterion_non_injective() {
  Stopwatch clock;
  const auto ds = generate_synthetic(parse_synthetic_spec(kFanSpec));
  auto cfg = desk_config();
  cfg.gamma = 12.0;
  cfg.steps = 2000;
  const auto result = train(ds, cfg);
  const auto& params = result.checkpoint.params;
  const RelationId member = *ds.relations.find("member_of");
  const RelationId control = *ds.relations.find("paired_with");

  EvalOptions opts;
  opts.keep_ranks = true;
  std::vector<std::size_t> tail_ranks;
  for (auto split : {EvalSplit::Valid, EvalSplit::Test}) {
    const auto rep = evaluate(params, ds, split, opts);
    const auto r = ranks_of(rep, member, Direction::Tail);
    tail_ranks.insert(tail_ranks.end(), r.begin(), r.end());
  }
  const double h1 = tail_ranks.empty() ? 0.0 : hits_at_k(tail_ranks, 1);
  auto ratio = [&](RelationId r, bool reverse) {
    const auto s = singular_values(relation_matrix(params, r, reverse));
    return s.front() > 0 ? s.back() / s.front() : 0.0;
  };
  const double secs = clock.seconds();
  return {h1 >= 0.9 ? Status::Pass : Status::Fail,
          format("N-to-1 tail Hits@1 %.3f on %zu held-out triples; sigma_min/sigma_max R_rev: N-to-1 %.3g, "
                 "1-to-1 control %.3g (R: %.3g, %.3g); %.0f s",
                 h1, tail_ranks.size(), ratio(member, true), ratio(control, true), ratio(member, false),
                 ratio(control, false), secs)};
}

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? v : nullptr;
}

Outcome criterion_dataset_stats() {
  const char* fb = env("SPACEE_FB15K237_DIR");
  const char* yago = env("SPACEE_YAGO3_10_DIR");
  if (fb == nullptr && yago == nullptr) {
    return {Status::Skip, "set SPACEE_FB15K237_DIR and/or SPACEE_YAGO3_10_DIR to run"};
  }
  bool ok = true;
  std::string detail;
  if (fb != nullptr) {
    const auto ds = load_dataset(fb);
    std::map<RelationId, RelationCategory> cat;
    for (const auto& s : relation_stats(ds.filter_all)) cat[s.relation] = s.category;
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& t : ds.test.triples()) ++counts[static_cast<int>(cat[t.relation])];
    const bool fb_ok = counts[0] == 74 && counts[1] == 67 && counts[2] == 1710 && counts[3] == 18615;
    ok &= fb_ok;
    detail += format("FB15k-237 categories %zu/%zu/%zu/%zu [%s]", counts[0], counts[1], counts[2], counts[3],
                     fb_ok ? "ok" : "expected 74/67/1710/18615");
  } else {
    detail += "FB15k-237 not given";
  }
  if (yago != nullptr) {
    const auto ds = load_dataset(yago);
    std::size_t buckets[kHptrBuckets] = {};
    std::size_t unseen = 0;
    for (const auto& t : ds.test.triples()) {
      if (ds.has_unseen_entity(t)) {
        ++unseen;
        continue;
      }
      ++buckets[hptr_bucket(hptr_of_triple(ds.filter_all, t)) - 1];
    }
    const bool y_ok = buckets[0] == 987 && buckets[1] == 913 && buckets[2] == 692 && buckets[3] == 2016 &&
                      buckets[4] == 374 && unseen == 18;
    ok &= y_ok;
    detail += format("; YAGO3-10 hptr buckets %zu/%zu/%zu/%zu/%zu, unseen %zu [%s]", buckets[0], buckets[1],
                     buckets[2], buckets[3], buckets[4], unseen, y_ok ? "ok" : "expected 987/913/692/2016/374, 18");
  } else {
    detail += "; YAGO3-10 not given";
  }
  return {ok ? Status::Pass : Status::Fail, detail};
}

Outcome criterion_full_benchmarks() {
  return {Status::Skip,
          "hours-long runs, not part of the required suite; see scripts/reproduce_wn18rr.sh and "
          "scripts/reproduce_fb15k237.sh (targets: WN18RR MRR 0.473 / H@10 0.570, FB15k-237 MRR 0.351, band "
          "+-0.01)"};
}

Outcome criterion_loss_spots() {
  // p = q = 1, R = R_rev = 1, positives at distance sqrt(gamma), negatives too.
  const double gamma = 5.0;
  ModelParams m(ModelShape{ModelKind::SpaceE, 4, 1, 1, 1});
  m.relation_fwd.row(0)[0] = 1.0;
  m.relation_rev.row(0)[0] = 1.0;
  m.entity.row(0)[0] = 0.0;
  for (EntityId e = 1; e < 4; ++e) m.entity.row(e)[0] = std::sqrt(gamma);
  TrainConfig cfg;
  cfg.p = cfg.q = 1;
  cfg.gamma = gamma;
  cfg.alpha = 1.0;
  const std::vector<EntityId> nh{0, 0}, nt{2, 3};
  const double loss = triple_loss(m, {0, 0, 1}, nh, nt, cfg).value;
  const double err = std::abs(loss - 4.0 * std::numbers::ln2);

  const std::vector<double> scores{0.3, 7.0, -2.0, 11.5, 4.0};
  const auto w = self_adv_weights(scores, 0.0, 9.0);
  bool uniform = true;
  for (double v : w) uniform &= v == 0.2;
  return {err < 1e-9 && uniform ? Status::Pass : Status::Fail,
          format("|loss - 4 ln 2| = %.2e; alpha = 0 weights uniform: %s", err, uniform ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion_gradients},       {2, criterion_rotate_subsumption}, {3, criterion_oracle},
      {4, criterion_ties},            {5, criterion_patterns},           {6, criterion_non_injective},
      {7, criterion_dataset_stats},   {8, criterion_full_benchmarks},    {9, criterion_loss_spots}};
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [n, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    failures += o.status == Status::Fail;
    std::printf("%s criterion %d: %s\n", tag, n, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
