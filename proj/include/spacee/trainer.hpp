#pragma once
// Self-adversarial negative sampling loss, the near-orthogonality regularizer
// and the training loop.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include "spacee/adam.hpp"
#include "spacee/kg.hpp"
#include "spacee/matrix.hpp"
#include "spacee/model.hpp"
#include "spacee/random.hpp"

namespace spacee {

enum class Precision : std::uint8_t { F32 = 4, F64 = 8 };

struct TrainConfig {
  ModelKind model = ModelKind::SpaceE;
  std::size_t p = 10;
  std::size_t q = 10;
  std::size_t batch_size = 512;
  double alpha = 1.0;   // self-adversarial temperature
  double gamma = 9.0;   // margin, in score units
  std::size_t negatives = 256;  // per direction per positive triple
  double lr = 1e-4;
  double lambda = 0.05;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;  // 0 disables periodic validation
  std::uint64_t eval_seed = 0;
  Precision precision = Precision::F64;
  std::size_t workers = 1;
  bool filter_false_negatives = false;

  void validate() const;
};

std::string_view precision_name(Precision p);

// Sets one option by its flag name ("batch-size", "adv-temp", "margin", ...).
// Returns false for keys that are not training options; throws ConfigError
// for malformed values.
bool apply_train_option(TrainConfig& cfg, std::string_view key, std::string_view value);

// Every option as (flag name, value) with values that parse back exactly.
std::vector<std::pair<std::string, std::string>> train_config_entries(const TrainConfig& cfg);

struct NegativeBatch {
  std::size_t k = 0;
  std::vector<EntityId> heads;  // k corrupted heads per positive, positive-major
  std::vector<EntityId> tails;

  std::span<const EntityId> heads_for(std::size_t i) const { return {heads.data() + i * k, k}; }
  std::span<const EntityId> tails_for(std::size_t i) const { return {tails.data() + i * k, k}; }
};

// Uniform over all entities. With `filter_known`, a corruption that forms a
// triple of `store` is redrawn (up to a bounded number of attempts).
NegativeBatch sample_negatives(const TripleStore& store, std::size_t n_entities,
                               std::span<const Triple> batch, std::size_t k, Rng& rng,
                               bool filter_known = false);

// softmax(alpha * (gamma - score)), max-shifted. Treated as constants.
std::vector<double> self_adv_weights(std::span<const double> scores, double alpha, double gamma);

// log(1 + exp(x)) without overflow; -log(sigmoid(x)) == softplus(-x).
double softplus(double x);
double sigmoid(double x);

struct LossResult {
  double value = 0.0;
  GradientSet grads;
};

// Four-term loss for one positive triple:
//   -log s(g - d) - log s(g - f) - sum w_i log s(d_i - g) - sum w_i log s(f_i - g)
// with d on head corruptions and f on tail corruptions.
LossResult triple_loss(const ModelParams& params, const Triple& triple,
                       std::span<const EntityId> neg_heads, std::span<const EntityId> neg_tails,
                       const TrainConfig& cfg);

// Adds `scale` * the loss gradient into `grads` and returns the unscaled loss.
double accumulate_triple_loss(const ModelParams& params, const Triple& triple,
                              std::span<const EntityId> neg_heads,
                              std::span<const EntityId> neg_tails, const TrainConfig& cfg,
                              double scale, GradientSet& grads);

struct RegResult {
  double value = 0.0;
  Matrix gradient;
};

// ||G o G - G||_F^2 with G = R^T R; zero whenever G only holds 0s and 1s.
RegResult ortho_reg(const Matrix& r);

// Mean triple loss plus lambda * (reg(R) + reg(R_rev)) for every distinct
// relation in the batch. Work is split into `workers` contiguous chunks whose
// gradients are merged in chunk order.
LossResult batch_loss(const ModelParams& params, std::span<const Triple> batch,
                      const NegativeBatch& negs, const TrainConfig& cfg, std::size_t workers = 1);

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  std::optional<AdamState> adam;
  std::uint64_t entity_hash = 0;
  std::uint64_t relation_hash = 0;
  std::uint64_t step = 0;
};

struct EvalPoint {
  std::size_t step = 0;
  double loss = 0.0;
  double mrr = 0.0;
  double hits10 = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;  // best validation MRR, or the final state without validation
  std::vector<double> losses;  // one per step
  std::vector<EvalPoint> evals;
};

// Runs cfg.steps Adam steps over batches drawn with replacement from train.
// Writes one "step,loss,mrr,hits10" line per validation to `telemetry`.
TrainResult train(const SplitDataset& dataset, const TrainConfig& cfg,
                  std::ostream* telemetry = nullptr, std::ostream* progress = nullptr);

}  // namespace spacee
