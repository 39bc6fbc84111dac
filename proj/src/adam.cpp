#include "spacee/adam.hpp"

#include <cmath>
#include <string>

#include "spacee/error.hpp"

namespace spacee {

namespace {

void check_finite(const SparseRows& rows, const char* name) {
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (double g : rows.row_at(s)) {
      if (!std::isfinite(g)) {
        throw NumericError(std::string("non-finite gradient in ") + name + " " +
                           std::to_string(rows.ids()[s]));
      }
    }
  }
}

void update_table(ParamTable& param, ParamTable& m, ParamTable& v, const SparseRows& grads,
                  const AdamState& st, double step_size, double bias2, bool round_to_float) {
  for (std::size_t s = 0; s < grads.size(); ++s) {
    const auto id = grads.ids()[s];
    const auto g = grads.row_at(s);
    auto p = param.row(id);
    auto mr = m.row(id);
    auto vr = v.row(id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      mr[i] = st.beta1 * mr[i] + (1.0 - st.beta1) * g[i];
      vr[i] = st.beta2 * vr[i] + (1.0 - st.beta2) * g[i] * g[i];
      p[i] -= step_size * mr[i] / (std::sqrt(vr[i] / bias2) + st.epsilon);
      if (round_to_float) p[i] = static_cast<double>(static_cast<float>(p[i]));
    }
  }
}

}  // namespace

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state, double lr,
               bool round_to_float) {
  if (!(state.first.shape == params.shape) || !(state.second.shape == params.shape)) {
    throw ConfigError("adam state shape does not match the parameters");
  }
  check_finite(grads.entity, "entity");
  check_finite(grads.relation_fwd, "relation");
  check_finite(grads.relation_rev, "reverse relation");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  const double step_size = lr / bias1;
  update_table(params.entity, state.first.entity, state.second.entity, grads.entity, state,
               step_size, bias2, round_to_float);
  update_table(params.relation_fwd, state.first.relation_fwd, state.second.relation_fwd,
               grads.relation_fwd, state, step_size, bias2, round_to_float);
  update_table(params.relation_rev, state.first.relation_rev, state.second.relation_rev,
               grads.relation_rev, state, step_size, bias2, round_to_float);
}

}  // namespace spacee
