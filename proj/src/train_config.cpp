#include <charconv>
#include <cstdio>

#include "spacee/error.hpp"
#include "spacee/trainer.hpp"

namespace spacee {

std::string_view precision_name(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

namespace {

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return v;
}

double parse_double(std::string_view key, std::string_view value) {
  std::string s(value);
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid value for " + std::string(key) + ": '" + s + "'");
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(value) + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool apply_train_option(TrainConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "model") cfg.model = parse_model_kind(value);
  else if (key == "p") cfg.p = parse_u64(key, value);
  else if (key == "q") cfg.q = parse_u64(key, value);
  else if (key == "batch-size") cfg.batch_size = parse_u64(key, value);
  else if (key == "adv-temp") cfg.alpha = parse_double(key, value);
  else if (key == "margin") cfg.gamma = parse_double(key, value);
  else if (key == "negatives") cfg.negatives = parse_u64(key, value);
  else if (key == "lr") cfg.lr = parse_double(key, value);
  else if (key == "reg") cfg.lambda = parse_double(key, value);
  else if (key == "steps") cfg.steps = parse_u64(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "eval-every") cfg.eval_every = parse_u64(key, value);
  else if (key == "eval-seed") cfg.eval_seed = parse_u64(key, value);
  else if (key == "workers") cfg.workers = parse_u64(key, value);
  else if (key == "filter-false-negatives") cfg.filter_false_negatives = parse_bool(key, value);
  else if (key == "precision") {
    if (value == "f32" || value == "4") cfg.precision = Precision::F32;
    else if (value == "f64" || value == "8") cfg.precision = Precision::F64;
    else throw ConfigError("precision must be f32 or f64");
  } else {
    return false;
  }
  return true;
}

std::vector<std::pair<std::string, std::string>> train_config_entries(const TrainConfig& cfg) {
  return {
      {"model", std::string(model_kind_name(cfg.model))},
      {"p", std::to_string(cfg.p)},
      {"q", std::to_string(cfg.q)},
      {"batch-size", std::to_string(cfg.batch_size)},
      {"adv-temp", format_double(cfg.alpha)},
      {"margin", format_double(cfg.gamma)},
      {"negatives", std::to_string(cfg.negatives)},
      {"lr", format_double(cfg.lr)},
      {"reg", format_double(cfg.lambda)},
      {"steps", std::to_string(cfg.steps)},
      {"seed", std::to_string(cfg.seed)},
      {"eval-every", std::to_string(cfg.eval_every)},
      {"eval-seed", std::to_string(cfg.eval_seed)},
      {"workers", std::to_string(cfg.workers)},
      {"filter-false-negatives", cfg.filter_false_negatives ? "true" : "false"},
      {"precision", std::string(precision_name(cfg.precision))},
  };
}

}  // namespace spacee
