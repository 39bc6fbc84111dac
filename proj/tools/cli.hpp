#pragma once
// Command-line driver: train, eval, analyze, synth and inspect.
//
// Settings are layered: built-in defaults, then a named preset, then the
// --config file, then explicit flags. Exit codes: 0 success, 1 usage or
// configuration error, 2 I/O or format error, 3 numerical failure.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spacee/trainer.hpp"

namespace spacee::cli {

struct RunConfig {
  std::string subcommand;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::filesystem::path checkpoint;
  std::filesystem::path spec;
  std::optional<std::string> preset;
  TrainConfig train;
  double category_threshold = kDefaultCategoryThreshold;
  std::string split = "test";  // eval: valid | test
  std::vector<std::string> queries;
};

struct Preset {
  std::string_view name;
  std::size_t p, q, batch_size;
  double alpha, gamma;
  std::size_t negatives;
  double lr, lambda;
};

const std::vector<Preset>& presets();
const Preset& find_preset(std::string_view name);  // throws ConfigError
void apply_preset(TrainConfig& cfg, const Preset& preset);

// Sets one option by its flag name (without dashes). Throws ConfigError for
// unknown keys and malformed values.
void apply_run_option(RunConfig& cfg, std::string_view key, std::string_view value);

int run_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_inspect(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses argv, resolves the layered configuration and dispatches. Never
// throws; errors are reported on `err` and mapped to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spacee::cli
