#include "spacee/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spacee/error.hpp"
#include "spacee/matrix.hpp"
#include "spacee/random.hpp"

namespace spacee {

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::SpaceE: return "spacee";
    case ModelKind::RotatE: return "rotate";
    case ModelKind::TransE: return "transe";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::SpaceE, ModelKind::RotatE, ModelKind::TransE}) {
    if (model_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown model '" + std::string(name) + "' (expected spacee, rotate or transe)");
}

std::string_view direction_name(Direction d) { return d == Direction::Head ? "head" : "tail"; }

std::size_t ModelShape::entity_row() const { return p * q; }

std::size_t ModelShape::relation_row() const { return kind == ModelKind::SpaceE ? q * q : q; }

std::size_t ModelShape::reverse_row() const { return kind == ModelKind::SpaceE ? q * q : 0; }

void validate_shape(const ModelShape& shape) {
  if (shape.n_entities == 0) throw ConfigError("model needs at least one entity");
  if (shape.n_relations == 0) throw ConfigError("model needs at least one relation");
  if (shape.p == 0 || shape.q == 0) throw ConfigError("embedding dims p and q must be >= 1");
  if (shape.kind == ModelKind::RotatE && shape.p != 2) {
    throw ConfigError("rotate model stores real and imaginary rows; p must be 2");
  }
  if (shape.kind == ModelKind::TransE && shape.p != 1) {
    throw ConfigError("transe model stores plain vectors; p must be 1");
  }
}

ModelParams::ModelParams(const ModelShape& s)
    : shape(s),
      entity(s.n_entities, s.entity_row()),
      relation_fwd(s.n_relations, s.relation_row()),
      relation_rev(s.n_relations, s.reverse_row()) {}

bool ModelParams::all_finite() const {
  for (const auto* table : {&entity, &relation_fwd, &relation_rev}) {
    for (double v : table->values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

ModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  validate_shape(shape);
  ModelParams params(shape);
  Rng rng(seed);
  NormalSampler normal(0.0, 0.1);
  for (auto& v : params.entity.values()) v = normal(rng);
  if (shape.kind == ModelKind::RotatE) {
    for (auto& v : params.relation_fwd.values()) {
      v = (2.0 * uniform_unit(rng) - 1.0) * std::numbers::pi;
    }
  } else {
    for (auto& v : params.relation_fwd.values()) v = normal(rng);
  }
  for (auto& v : params.relation_rev.values()) v = normal(rng);
  return params;
}

ModelParams init_params(std::size_t n_e, std::size_t n_r, std::size_t p, std::size_t q,
                        std::uint64_t seed) {
  return init_params(ModelShape{ModelKind::SpaceE, n_e, n_r, p, q}, seed);
}

std::span<double> SparseRows::row(std::uint32_t id) {
  auto [it, inserted] = slot_.emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    data_.resize(data_.size() + row_size_, 0.0);
  }
  return {data_.data() + it->second * row_size_, row_size_};
}

const double* SparseRows::find(std::uint32_t id) const {
  auto it = slot_.find(id);
  return it == slot_.end() ? nullptr : data_.data() + it->second * row_size_;
}

void SparseRows::add(const SparseRows& other, double scale) {
  if (other.row_size_ != row_size_) throw std::invalid_argument("gradient row size mismatch");
  for (std::size_t s = 0; s < other.ids_.size(); ++s) {
    auto dst = row(other.ids_[s]);
    auto src = other.row_at(s);
    for (std::size_t i = 0; i < row_size_; ++i) dst[i] += scale * src[i];
  }
}

void SparseRows::scale(double s) {
  for (auto& v : data_) v *= s;
}

void GradientSet::add(const GradientSet& other, double scale) {
  entity.add(other.entity, scale);
  relation_fwd.add(other.relation_fwd, scale);
  relation_rev.add(other.relation_rev, scale);
}

void GradientSet::scale(double s) {
  entity.scale(s);
  relation_fwd.scale(s);
  relation_rev.scale(s);
}

namespace {

void check_ids(const ModelParams& params, const Triple& t) {
  if (t.head >= params.shape.n_entities || t.tail >= params.shape.n_entities) {
    throw std::out_of_range("entity id out of range");
  }
  if (t.relation >= params.shape.n_relations) throw std::out_of_range("relation id out of range");
}

// residual = X M - Y with X, Y p x q and M q x q.
void matrix_residual(std::span<const double> x, std::span<const double> m,
                     std::span<const double> y, std::size_t p, std::size_t q,
                     std::span<double> residual) {
  matmul(x, m, residual, p, q, q);
  for (std::size_t i = 0; i < p * q; ++i) residual[i] -= y[i];
}

// The transformed entity, the transform and the target for one direction.
struct SpaceERoles {
  EntityId source;
  EntityId target;
  std::span<const double> transform;
};

SpaceERoles spacee_roles(const ModelParams& params, Direction dir, const Triple& t) {
  if (dir == Direction::Head) return {t.head, t.tail, params.relation_fwd.row(t.relation)};
  return {t.tail, t.head, params.relation_rev.row(t.relation)};
}

// residual of the rotation: (source o e^{i*sign*theta}) - target, laid out as
// [re..., im...]. Tail prediction rotates the tail backwards.
void rotate_residual(const ModelParams& params, Direction dir, const Triple& t,
                     std::span<double> residual) {
  const std::size_t k = params.shape.q;
  const auto src = params.entity.row(dir == Direction::Head ? t.head : t.tail);
  const auto dst = params.entity.row(dir == Direction::Head ? t.tail : t.head);
  const auto phase = params.relation_fwd.row(t.relation);
  const double sign = dir == Direction::Head ? 1.0 : -1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = std::cos(phase[i]), s = sign * std::sin(phase[i]);
    residual[i] = src[i] * c - src[k + i] * s - dst[i];
    residual[k + i] = src[i] * s + src[k + i] * c - dst[k + i];
  }
}

// head: h + r - t; tail: t - r - h.
void transe_residual(const ModelParams& params, Direction dir, const Triple& t,
                     std::span<double> residual) {
  const auto h = params.entity.row(t.head);
  const auto r = params.relation_fwd.row(t.relation);
  const auto e = params.entity.row(t.tail);
  const double sign = dir == Direction::Head ? 1.0 : -1.0;
  for (std::size_t i = 0; i < params.shape.q; ++i) residual[i] = sign * (h[i] + r[i] - e[i]);
}

void residual_into(const ModelParams& params, Direction dir, const Triple& t,
                   std::span<double> residual) {
  switch (params.shape.kind) {
    case ModelKind::SpaceE: {
      auto roles = spacee_roles(params, dir, t);
      matrix_residual(params.entity.row(roles.source), roles.transform,
                      params.entity.row(roles.target), params.shape.p, params.shape.q, residual);
      break;
    }
    case ModelKind::RotatE: rotate_residual(params, dir, t, residual); break;
    case ModelKind::TransE: transe_residual(params, dir, t, residual); break;
  }
}

double score_from_residual(ModelKind kind, std::span<const double> residual) {
  const double sq = squared_frobenius_norm(residual);
  return kind == ModelKind::SpaceE ? sq : std::sqrt(sq);
}

std::size_t residual_size(const ModelShape& s) {
  return s.kind == ModelKind::RotatE ? 2 * s.q : s.p * s.q;
}

}  // namespace

double score(const ModelParams& params, Direction dir, const Triple& t) {
  check_ids(params, t);
  std::vector<double> residual(residual_size(params.shape));
  residual_into(params, dir, t, residual);
  return score_from_residual(params.shape.kind, residual);
}

ScoreBatch score_candidates(const ModelParams& params, Direction dir, const Triple& query,
                            std::span<const EntityId> candidates) {
  if (candidates.empty()) throw std::invalid_argument("score_candidates: no candidates");
  ScoreBatch batch;
  batch.direction = dir;
  batch.values.reserve(candidates.size());
  std::vector<double> residual(residual_size(params.shape));
  Triple t = query;
  for (EntityId c : candidates) {
    (dir == Direction::Head ? t.head : t.tail) = c;
    check_ids(params, t);
    residual_into(params, dir, t, residual);
    batch.values.push_back(score_from_residual(params.shape.kind, residual));
  }
  return batch;
}

void accumulate_score_gradient(const ModelParams& params, Direction dir, const Triple& t,
                               double coeff, GradientSet& grads) {
  check_ids(params, t);
  const auto& shape = params.shape;
  std::vector<double> residual(residual_size(shape));
  residual_into(params, dir, t, residual);

  switch (shape.kind) {
    case ModelKind::SpaceE: {
      // With D = X M - Y: dX = 2 D M^T, dM = 2 X^T D, dY = -2 D.
      const std::size_t p = shape.p, q = shape.q;
      auto roles = spacee_roles(params, dir, t);
      const auto x = params.entity.row(roles.source);
      const auto& m = roles.transform;
      const double c2 = 2.0 * coeff;
      auto dx = grads.entity.row(roles.source);
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < q; ++k) {
          double acc = 0.0;
          for (std::size_t j = 0; j < q; ++j) acc += residual[i * q + j] * m[k * q + j];
          dx[i * q + k] += c2 * acc;
        }
      }
      auto dm = dir == Direction::Head ? grads.relation_fwd.row(t.relation)
                                       : grads.relation_rev.row(t.relation);
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < q; ++k) {
          const double xik = c2 * x[i * q + k];
          for (std::size_t j = 0; j < q; ++j) dm[k * q + j] += xik * residual[i * q + j];
        }
      }
      auto dy = grads.entity.row(roles.target);
      for (std::size_t i = 0; i < p * q; ++i) dy[i] -= c2 * residual[i];
      break;
    }
    case ModelKind::RotatE: {
      const double norm = std::sqrt(squared_frobenius_norm(residual));
      if (norm == 0.0) break;  // zero subgradient at the minimum
      const std::size_t k = shape.q;
      const EntityId src_id = dir == Direction::Head ? t.head : t.tail;
      const EntityId dst_id = dir == Direction::Head ? t.tail : t.head;
      const auto src = params.entity.row(src_id);
      const auto phase = params.relation_fwd.row(t.relation);
      const double sign = dir == Direction::Head ? 1.0 : -1.0;
      grads.entity.row(dst_id);  // create both rows before taking spans
      auto dsrc = grads.entity.row(src_id);
      auto dphase = grads.relation_fwd.row(t.relation);
      auto ddst = grads.entity.row(dst_id);
      for (std::size_t i = 0; i < k; ++i) {
        const double gre = coeff * residual[i] / norm;
        const double gim = coeff * residual[k + i] / norm;
        const double c = std::cos(phase[i]), s = sign * std::sin(phase[i]);
        const double rot_re = src[i] * c - src[k + i] * s;
        const double rot_im = src[i] * s + src[k + i] * c;
        dsrc[i] += gre * c + gim * s;
        dsrc[k + i] += -gre * s + gim * c;
        dphase[i] += sign * (-gre * rot_im + gim * rot_re);
        ddst[i] -= gre;
        ddst[k + i] -= gim;
      }
      break;
    }
    case ModelKind::TransE: {
      const double norm = std::sqrt(squared_frobenius_norm(residual));
      if (norm == 0.0) break;
      const double sign = dir == Direction::Head ? 1.0 : -1.0;
      grads.entity.row(t.tail);  // create both rows before taking spans
      auto dh = grads.entity.row(t.head);
      auto dr = grads.relation_fwd.row(t.relation);
      auto dt = grads.entity.row(t.tail);
      for (std::size_t i = 0; i < shape.q; ++i) {
        const double g = coeff * sign * residual[i] / norm;
        dh[i] += g;
        dr[i] += g;
        dt[i] -= g;
      }
      break;
    }
  }
}

GradientSet grad_score_head(const ModelParams& params, EntityId h, RelationId r, EntityId t) {
  GradientSet g(params.shape);
  accumulate_score_gradient(params, Direction::Head, {h, r, t}, 1.0, g);
  return g;
}

GradientSet grad_score_tail(const ModelParams& params, EntityId h, RelationId r, EntityId t) {
  GradientSet g(params.shape);
  accumulate_score_gradient(params, Direction::Tail, {h, r, t}, 1.0, g);
  return g;
}

std::uint64_t param_count(std::uint64_t n_e, std::uint64_t n_r, std::uint64_t p, std::uint64_t q) {
  if (p == 0 || q == 0) throw ConfigError("param_count needs positive p and q");
  return n_e * p * q + 2 * n_r * q * q;
}

}  // namespace spacee
