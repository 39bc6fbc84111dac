#pragma once
// Parameter storage, score functions and analytic score gradients.
//
// SpaceE embeds each entity as a p x q matrix and each relation as a pair of
// q x q matrices: R for head prediction and R_rev for tail prediction.
//
//   head score  d(h, r, t) = ||H R - T||_F^2
//   tail score  f(h, r, t) = ||T R_rev - H||_F^2
//
// Lower is more plausible. The same storage also hosts the two baselines:
// RotatE (entity rows hold K real parts then K imaginary parts, relations hold
// K phases) and TransE (entity and relation rows are plain vectors). Baseline
// scores use the unsquared L2 norm.

#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spacee/kg.hpp"

namespace spacee {

enum class ModelKind : std::uint8_t { SpaceE = 0, RotatE = 1, TransE = 2 };

std::string_view model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view name);

// Which slot of the triple is being predicted. Head prediction ranks with the
// head score d, tail prediction with the tail score f.
enum class Direction : std::uint8_t { Head = 0, Tail = 1 };

std::string_view direction_name(Direction d);

// Dense n_rows x row_size table, row-major.
class ParamTable {
 public:
  ParamTable() = default;
  ParamTable(std::size_t rows, std::size_t row_size)
      : rows_(rows), row_size_(row_size), data_(rows * row_size, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t row_size() const { return row_size_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * row_size_, row_size_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * row_size_, row_size_};
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const ParamTable&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t row_size_ = 0;
  std::vector<double> data_;
};

struct ModelShape {
  ModelKind kind = ModelKind::SpaceE;
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  std::size_t p = 0;
  std::size_t q = 0;

  std::size_t entity_row() const;
  std::size_t relation_row() const;
  std::size_t reverse_row() const;  // 0 for the baselines

  bool operator==(const ModelShape&) const = default;
};

// Validates dims for the kind: RotatE needs p == 2, TransE needs p == 1.
void validate_shape(const ModelShape& shape);

struct ModelParams {
  ModelShape shape;
  ParamTable entity;        // n_e x (p*q)
  ParamTable relation_fwd;  // n_r x (q*q)
  ParamTable relation_rev;  // n_r x (q*q)

  explicit ModelParams(const ModelShape& s);
  ModelParams() = default;

  bool all_finite() const;
  bool operator==(const ModelParams&) const = default;
};

// Every parameter ~ N(0, 0.1^2) (RotatE phases ~ U[-pi, pi)); deterministic in seed.
ModelParams init_params(const ModelShape& shape, std::uint64_t seed);
ModelParams init_params(std::size_t n_e, std::size_t n_r, std::size_t p, std::size_t q,
                        std::uint64_t seed);

// Row storage keyed by id; rows are created zeroed on first touch and kept
// in first-touch order.
class SparseRows {
 public:
  explicit SparseRows(std::size_t row_size = 0) : row_size_(row_size) {}

  std::size_t row_size() const { return row_size_; }
  std::span<double> row(std::uint32_t id);
  // Null if the row was never touched.
  const double* find(std::uint32_t id) const;
  std::span<const double> row_at(std::size_t slot) const {
    return {data_.data() + slot * row_size_, row_size_};
  }
  const std::vector<std::uint32_t>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  void add(const SparseRows& other, double scale = 1.0);
  void scale(double s);

 private:
  std::size_t row_size_;
  std::unordered_map<std::uint32_t, std::size_t> slot_;
  std::vector<std::uint32_t> ids_;
  std::vector<double> data_;
};

struct GradientSet {
  SparseRows entity;
  SparseRows relation_fwd;
  SparseRows relation_rev;

  GradientSet() = default;
  explicit GradientSet(const ModelShape& shape)
      : entity(shape.entity_row()),
        relation_fwd(shape.relation_row()),
        relation_rev(shape.reverse_row()) {}

  void add(const GradientSet& other, double scale = 1.0);
  void scale(double s);
};

struct ScoreBatch {
  std::vector<double> values;
  Direction direction = Direction::Head;
};

// Score of one triple for the given prediction direction (dispatches on kind).
double score(const ModelParams& params, Direction dir, const Triple& t);

inline double score_head(const ModelParams& params, EntityId h, RelationId r, EntityId t) {
  return score(params, Direction::Head, {h, r, t});
}
inline double score_tail(const ModelParams& params, EntityId h, RelationId r, EntityId t) {
  return score(params, Direction::Tail, {h, r, t});
}

// Scores each candidate in the predicted slot of `query`; the other two
// slots of `query` are held fixed.
ScoreBatch score_candidates(const ModelParams& params, Direction dir, const Triple& query,
                            std::span<const EntityId> candidates);

// Adds coeff * d score / d params into `grads`.
void accumulate_score_gradient(const ModelParams& params, Direction dir, const Triple& t,
                               double coeff, GradientSet& grads);

GradientSet grad_score_head(const ModelParams& params, EntityId h, RelationId r, EntityId t);
GradientSet grad_score_tail(const ModelParams& params, EntityId h, RelationId r, EntityId t);

// n_e*p*q + 2*n_r*q^2: R and R_rev are both stored per relation.
std::uint64_t param_count(std::uint64_t n_e, std::uint64_t n_r, std::uint64_t p, std::uint64_t q);

}  // namespace spacee
