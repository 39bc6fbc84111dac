#include "spacee/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "spacee/error.hpp"
#include "spacee/evaluator.hpp"

namespace spacee {

void TrainConfig::validate() const {
  if (p == 0 || q == 0) throw ConfigError("p and q must be >= 1");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("adversarial temperature must be >= 0");
  if (!(gamma > 0.0)) throw ConfigError("margin must be > 0");
  if (negatives == 0) throw ConfigError("negatives must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(lambda >= 0.0)) throw ConfigError("regularization coefficient must be >= 0");
  if (workers == 0) throw ConfigError("workers must be >= 1");
  if (model == ModelKind::RotatE && p != 2) throw ConfigError("rotate model requires p = 2");
  if (model == ModelKind::TransE && p != 1) throw ConfigError("transe model requires p = 1");
}

NegativeBatch sample_negatives(const TripleStore& store, std::size_t n_entities,
                               std::span<const Triple> batch, std::size_t k, Rng& rng,
                               bool filter_known) {
  if (k == 0) throw ConfigError("negatives must be >= 1");
  if (n_entities == 0) throw ConfigError("cannot sample negatives without entities");
  constexpr int kMaxRedraws = 64;
  NegativeBatch negs;
  negs.k = k;
  negs.heads.reserve(batch.size() * k);
  negs.tails.reserve(batch.size() * k);
  auto draw = [&](const Triple& t, bool head) {
    EntityId e = static_cast<EntityId>(uniform_index(rng, n_entities));
    for (int attempt = 0; filter_known && attempt < kMaxRedraws; ++attempt) {
      Triple c = t;
      (head ? c.head : c.tail) = e;
      if (!store.contains(c)) break;
      e = static_cast<EntityId>(uniform_index(rng, n_entities));
    }
    return e;
  };
  for (const auto& t : batch) {
    for (std::size_t i = 0; i < k; ++i) negs.heads.push_back(draw(t, true));
    for (std::size_t i = 0; i < k; ++i) negs.tails.push_back(draw(t, false));
  }
  return negs;
}

std::vector<double> self_adv_weights(std::span<const double> scores, double alpha, double gamma) {
  if (scores.empty()) throw std::invalid_argument("self_adv_weights: no scores");
  std::vector<double> w(scores.size());
  double top = -INFINITY;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = alpha * (gamma - scores[i]);
    top = std::max(top, w[i]);
  }
  double sum = 0.0;
  for (auto& v : w) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double accumulate_triple_loss(const ModelParams& params, const Triple& triple,
                              std::span<const EntityId> neg_heads,
                              std::span<const EntityId> neg_tails, const TrainConfig& cfg,
                              double scale, GradientSet& grads) {
  const double gamma = cfg.gamma;
  double loss = 0.0;

  // Positive terms: -log s(g - x) = softplus(x - g), derivative s(x - g).
  for (auto dir : {Direction::Head, Direction::Tail}) {
    const double s = score(params, dir, triple);
    loss += softplus(s - gamma);
    accumulate_score_gradient(params, dir, triple, scale * sigmoid(s - gamma), grads);
  }

  // Negative terms: -w log s(x - g) = w softplus(g - x), derivative -w s(g - x).
  auto negative_terms = [&](Direction dir, std::span<const EntityId> corrupt) {
    if (corrupt.empty()) return;
    const auto scores = score_candidates(params, dir, triple, corrupt);
    const auto weights = self_adv_weights(scores.values, cfg.alpha, gamma);
    Triple c = triple;
    for (std::size_t i = 0; i < corrupt.size(); ++i) {
      const double s = scores.values[i];
      loss += weights[i] * softplus(gamma - s);
      (dir == Direction::Head ? c.head : c.tail) = corrupt[i];
      accumulate_score_gradient(params, dir, c, -scale * weights[i] * sigmoid(gamma - s), grads);
    }
  };
  negative_terms(Direction::Head, neg_heads);
  negative_terms(Direction::Tail, neg_tails);
  return loss;
}

LossResult triple_loss(const ModelParams& params, const Triple& triple,
                       std::span<const EntityId> neg_heads, std::span<const EntityId> neg_tails,
                       const TrainConfig& cfg) {
  LossResult out;
  out.grads = GradientSet(params.shape);
  out.value = accumulate_triple_loss(params, triple, neg_heads, neg_tails, cfg, 1.0, out.grads);
  return out;
}

RegResult ortho_reg(const Matrix& r) {
  if (!r.is_square()) throw std::invalid_argument("ortho_reg needs a square matrix");
  const std::size_t q = r.rows();
  const Matrix gram = r.transposed() * r;
  // E = G o G - G; dV/dG = 2 E o (2G - 1), symmetric, so dV/dR = 2 R (dV/dG).
  Matrix dgram(q, q);
  double value = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      const double g = gram(i, j);
      const double e = g * g - g;
      value += e * e;
      dgram(i, j) = 2.0 * e * (2.0 * g - 1.0);
    }
  }
  return {value, 2.0 * (r * dgram)};
}

namespace {

void add_relation_reg(const ParamTable& table, SparseRows& grads, RelationId rel, std::size_t q,
                      double lambda, double& loss) {
  const Matrix r(q, q, table.row(rel));
  const auto reg = ortho_reg(r);
  loss += lambda * reg.value;
  auto g = grads.row(rel);
  const auto src = reg.gradient.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += lambda * src[i];
}

}  // namespace

LossResult batch_loss(const ModelParams& params, std::span<const Triple> batch,
                      const NegativeBatch& negs, const TrainConfig& cfg, std::size_t workers) {
  LossResult out;
  out.grads = GradientSet(params.shape);
  if (batch.empty()) return out;
  const double scale = 1.0 / static_cast<double>(batch.size());

  workers = std::max<std::size_t>(1, std::min(workers, batch.size()));
  const std::size_t chunk = (batch.size() + workers - 1) / workers;
  std::vector<GradientSet> partial(workers, GradientSet(params.shape));
  std::vector<double> partial_loss(workers, 0.0);
  auto work = [&](std::size_t w) {
    const std::size_t b = w * chunk, e = std::min(batch.size(), b + chunk);
    for (std::size_t i = b; i < e; ++i) {
      partial_loss[w] += accumulate_triple_loss(params, batch[i], negs.heads_for(i),
                                                negs.tails_for(i), cfg, scale, partial[w]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  double loss = 0.0;
  for (std::size_t w = 0; w < workers; ++w) {
    loss += partial_loss[w];
    out.grads.add(partial[w]);
  }
  loss *= scale;

  // The regularizer only constrains square relation matrices.
  if (params.shape.kind == ModelKind::SpaceE && cfg.lambda > 0.0) {
    std::vector<RelationId> seen;
    for (const auto& t : batch) {
      if (std::find(seen.begin(), seen.end(), t.relation) != seen.end()) continue;
      seen.push_back(t.relation);
      add_relation_reg(params.relation_fwd, out.grads.relation_fwd, t.relation, params.shape.q,
                       cfg.lambda, loss);
      add_relation_reg(params.relation_rev, out.grads.relation_rev, t.relation, params.shape.q,
                       cfg.lambda, loss);
    }
  }
  out.value = loss;
  return out;
}

namespace {

void round_params_to_float(ModelParams& params) {
  for (auto* table : {&params.entity, &params.relation_fwd, &params.relation_rev}) {
    for (auto& v : table->values()) v = static_cast<double>(static_cast<float>(v));
  }
}

}  // namespace

TrainResult train(const SplitDataset& dataset, const TrainConfig& cfg, std::ostream* telemetry,
                  std::ostream* progress) {
  cfg.validate();
  if (dataset.train.empty()) throw ConfigError("training split is empty");

  const ModelShape shape{cfg.model, dataset.entities.size(), dataset.relations.size(), cfg.p, cfg.q};
  TrainResult result;
  Checkpoint& best = result.checkpoint;
  best.config = cfg;
  best.entity_hash = dataset.entities.hash();
  best.relation_hash = dataset.relations.hash();

  ModelParams params = init_params(shape, cfg.seed);
  const bool f32 = cfg.precision == Precision::F32;
  if (f32) round_params_to_float(params);
  AdamState adam(shape);

  // Separate streams so changing eval settings never perturbs training draws.
  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  const auto& train_triples = dataset.train.triples();
  const bool validate = cfg.eval_every > 0 && !dataset.valid.empty();
  double best_mrr = -1.0;
  double interval_loss = 0.0;
  std::size_t interval_steps = 0;
  std::vector<Triple> batch(cfg.batch_size);

  auto run_validation = [&](std::size_t step) {
    EvalOptions opts;
    opts.seed = cfg.eval_seed;
    opts.workers = cfg.workers;
    const auto report = evaluate(params, dataset, EvalSplit::Valid, opts);
    EvalPoint point{step, interval_steps > 0 ? interval_loss / static_cast<double>(interval_steps) : 0.0,
                    report.overall.mrr, report.overall.hits10};
    result.evals.push_back(point);
    interval_loss = 0.0;
    interval_steps = 0;
    if (telemetry != nullptr) {
      *telemetry << point.step << ',' << point.loss << ',' << point.mrr << ',' << point.hits10 << '\n';
      telemetry->flush();
    }
    if (progress != nullptr) {
      *progress << "step " << point.step << "  loss " << point.loss << "  valid MRR " << point.mrr
                << "  H@10 " << point.hits10 << '\n';
    }
    if (point.mrr > best_mrr) {
      best_mrr = point.mrr;
      best.params = params;
      best.adam = adam;
      best.step = step;
    }
  };

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    for (auto& t : batch) t = train_triples[uniform_index(rng, train_triples.size())];
    const auto negs = sample_negatives(dataset.train, shape.n_entities, batch, cfg.negatives, rng,
                                       cfg.filter_false_negatives);
    auto loss = batch_loss(params, batch, negs, cfg, cfg.workers);
    if (!std::isfinite(loss.value)) {
      throw NumericError("non-finite loss at step " + std::to_string(step));
    }
    adam_step(params, loss.grads, adam, cfg.lr, f32);
    result.losses.push_back(loss.value);
    interval_loss += loss.value;
    ++interval_steps;
    if (validate && (step % cfg.eval_every == 0 || step == cfg.steps)) run_validation(step);
  }

  if (!validate || best_mrr < 0.0) {
    best.params = std::move(params);
    best.adam = std::move(adam);
    best.step = cfg.steps;
  }
  return result;
}

}  // namespace spacee
