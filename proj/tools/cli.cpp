#include "cli.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "spacee/checkpoint.hpp"
#include "spacee/config_file.hpp"
#include "spacee/error.hpp"
#include "spacee/evaluator.hpp"
#include "spacee/kg.hpp"
#include "spacee/patterns.hpp"
#include "spacee/synthetic.hpp"

namespace spacee::cli {

namespace fs = std::filesystem;

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = {
      {"fb15k", 45, 45, 1024, 1.0, 24.0, 256, 1e-4, 0.6},
      {"wn18", 45, 45, 512, 0.5, 12.0, 1024, 1e-4, 0.05},
      {"fb15k-237", 45, 45, 1024, 1.0, 9.0, 256, 1e-4, 0.05},
      {"wn18rr", 10, 40, 512, 0.5, 3.0, 1024, 2e-4, 0.1},
      {"yago3-10", 20, 40, 1024, 1.0, 12.0, 256, 2e-4, 0.005},
  };
  return table;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::string valid;
  for (const auto& p : presets()) valid += (valid.empty() ? "" : ", ") + std::string(p.name);
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected one of " + valid + ")");
}

void apply_preset(TrainConfig& cfg, const Preset& preset) {
  cfg.p = preset.p;
  cfg.q = preset.q;
  cfg.batch_size = preset.batch_size;
  cfg.alpha = preset.alpha;
  cfg.gamma = preset.gamma;
  cfg.negatives = preset.negatives;
  cfg.lr = preset.lr;
  cfg.lambda = preset.lambda;
}

namespace {

double parse_real(std::string_view key, std::string_view value) {
  const std::string s(value);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid value for " + std::string(key) + ": '" + s + "'");
}

}  // namespace

void apply_run_option(RunConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "dataset") cfg.dataset = std::string(value);
  else if (key == "out") cfg.out = std::string(value);
  else if (key == "checkpoint") cfg.checkpoint = std::string(value);
  else if (key == "spec") cfg.spec = std::string(value);
  else if (key == "preset") cfg.preset = std::string(value);
  else if (key == "category-threshold") cfg.category_threshold = parse_real(key, value);
  else if (key == "split") {
    if (value != "valid" && value != "test") throw ConfigError("split must be valid or test");
    cfg.split = std::string(value);
  } else if (key == "query") cfg.queries.emplace_back(value);
  else if (!apply_train_option(cfg.train, key, value)) {
    throw ConfigError("unknown option '" + std::string(key) + "'");
  }
}

namespace {

void require(const fs::path& path, std::string_view flag) {
  if (path.empty()) throw ConfigError("--" + std::string(flag) + " is required");
}

void require_dir(const fs::path& path, std::string_view what) {
  if (!fs::is_directory(path)) throw IoError(std::string(what) + " directory not found: " + path.string());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void check_compatible(const Checkpoint& ckpt, const SplitDataset& ds) {
  if (ckpt.entity_hash != ds.entities.hash() || ckpt.relation_hash != ds.relations.hash()) {
    throw ConfigError("checkpoint vocabulary does not match the dataset (hash mismatch)");
  }
  if (ckpt.params.shape.n_entities != ds.entities.size() ||
      ckpt.params.shape.n_relations != ds.relations.size()) {
    throw ConfigError("checkpoint shape does not match the dataset");
  }
}

std::string file_token(std::string_view s) {
  std::string out;
  for (char c : s) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

int run_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.train.validate();
  require(cfg.dataset, "dataset");
  require(cfg.out, "out");
  require_dir(cfg.dataset, "dataset");
  const auto ds = load_dataset(cfg.dataset, &err);

  fs::create_directories(cfg.out);
  {
    auto f = open_output(cfg.out / "config.txt");
    if (cfg.preset) f << "# preset " << *cfg.preset << " plus overrides\n";
    for (const auto& [k, v] : train_config_entries(cfg.train)) f << k << " = " << v << '\n';
  }
  auto telemetry = open_output(cfg.out / "telemetry.csv");
  telemetry << "step,loss,mrr,hits10\n";
  const auto result = train(ds, cfg.train, &telemetry, &err);

  {
    auto f = open_output(cfg.out / "loss.csv");
    f << "step,loss\n";
    for (std::size_t i = 0; i < result.losses.size(); ++i) f << i + 1 << ',' << fmt(result.losses[i], "%.10g") << '\n';
  }
  save_checkpoint(result.checkpoint, cfg.out / "model.ckpt");
  out << "trained " << model_kind_name(cfg.train.model) << " for " << cfg.train.steps
      << " steps; checkpoint from step " << result.checkpoint.step << " written to "
      << (cfg.out / "model.ckpt").string() << '\n';
  return 0;
}

int run_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.dataset, "dataset");
  require(cfg.checkpoint, "checkpoint");
  require(cfg.out, "out");
  if (!(cfg.category_threshold > 1.0)) throw ConfigError("--category-threshold must be > 1");
  if (cfg.train.workers == 0) throw ConfigError("--workers must be >= 1");
  const auto ckpt = load_checkpoint(cfg.checkpoint);
  require_dir(cfg.dataset, "dataset");
  const auto ds = load_dataset(cfg.dataset, &err);
  check_compatible(ckpt, ds);

  EvalOptions opts;
  opts.seed = cfg.train.eval_seed;
  opts.workers = cfg.train.workers;
  opts.category_threshold = cfg.category_threshold;
  opts.keep_ranks = true;
  const auto split = cfg.split == "valid" ? EvalSplit::Valid : EvalSplit::Test;
  const auto report = evaluate(ckpt.params, ds, split, opts);

  fs::create_directories(cfg.out);
  {
    auto f = open_output(cfg.out / "eval_report.tsv");
    write_report_flat(f, report);
  }
  {
    auto f = open_output(cfg.out / "ranks.tsv");
    write_ranks(f, report, ds);
  }
  write_report_table(out, report);
  return 0;
}

int run_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.dataset, "dataset");
  require(cfg.checkpoint, "checkpoint");
  require(cfg.out, "out");
  const auto ckpt = load_checkpoint(cfg.checkpoint);
  require_dir(cfg.dataset, "dataset");
  const auto ds = load_dataset(cfg.dataset, &err);
  check_compatible(ckpt, ds);

  std::vector<PatternQuery> queries;
  for (const auto& q : cfg.queries) queries.push_back(parse_pattern_query(q));
  if (queries.empty()) queries = default_queries(ds.relations);
  const auto reports = analyze(ckpt.params, ds.relations, queries);

  fs::create_directories(cfg.out / "heatmaps");
  {
    auto f = open_output(cfg.out / "patterns.tsv");
    write_pattern_reports(f, reports);
  }
  auto sv = open_output(cfg.out / "singular_values.tsv");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::string rels, token;
    for (const auto& n : r.relations) {
      rels += (rels.empty() ? "" : " ") + n;
      token += "_" + file_token(n);
    }
    char index[16];
    std::snprintf(index, sizeof index, "%03zu_", i);
    const auto heatmap = cfg.out / "heatmaps" / (index + std::string(query_kind_name(r.kind)) + token + ".txt");
    {
      auto f = open_output(heatmap);
      write_heatmap(f, export_heatmap(r.heatmap_source));
    }
    out << query_kind_name(r.kind) << ' ' << rels << ": deviation " << fmt(r.deviation);
    if (!std::isnan(r.identity_ratio)) out << ", identity ratio " << fmt(r.identity_ratio);
    out << '\n';
    if (!r.singular_values.empty()) {
      sv << rels;
      for (double s : r.singular_values) sv << '\t' << fmt(s, "%.10g");
      sv << '\n';
    }
  }
  return 0;
}

int run_synth(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(cfg.spec, "spec");
  require(cfg.out, "out");
  const auto spec = load_synthetic_spec(cfg.spec.string());
  const auto ds = generate_synthetic(spec);
  fs::create_directories(cfg.out);
  save_dataset(ds, cfg.out);
  out << "wrote " << ds.entities.size() << " entities, " << ds.relations.size() << " relations, "
      << ds.train.size() << "/" << ds.valid.size() << "/" << ds.test.size()
      << " train/valid/test triples to " << cfg.out.string() << '\n';
  return 0;
}

int run_inspect(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(cfg.checkpoint, "checkpoint");
  const auto ckpt = load_checkpoint(cfg.checkpoint);
  const auto& s = ckpt.params.shape;
  const std::size_t elems = s.n_entities * s.entity_row() + s.n_relations * (s.relation_row() + s.reverse_row());
  out << "model        " << model_kind_name(s.kind) << '\n'
      << "precision    " << precision_name(ckpt.config.precision) << '\n'
      << "entities     " << s.n_entities << '\n'
      << "relations    " << s.n_relations << '\n'
      << "p x q        " << s.p << " x " << s.q << '\n'
      << "parameters   " << elems << '\n'
      << "step         " << ckpt.step << '\n'
      << "optimizer    " << (ckpt.adam ? "adam state saved (step " + std::to_string(ckpt.adam->step) + ")" : "none")
      << '\n'
      << "entity hash  " << std::hex << std::setw(16) << std::setfill('0') << ckpt.entity_hash << '\n'
      << "relation hash " << std::setw(16) << ckpt.relation_hash << std::dec << std::setfill(' ') << '\n'
      << "finite       " << (ckpt.params.all_finite() ? "yes" : "no") << '\n';
  for (const auto& [k, v] : train_config_entries(ckpt.config)) out << "config." << k << " = " << v << '\n';
  return 0;
}

namespace {

const std::vector<std::string> kTrainKeys = {
    "model", "p", "q", "batch-size", "adv-temp", "margin", "negatives", "lr", "reg",
    "steps", "seed", "eval-every", "eval-seed", "workers", "precision"};

struct Collected {
  std::map<std::string, std::string> values;
  std::vector<std::string> queries;
  std::string config;
};

void add_value(CLI::App* sub, Collected& c, const std::string& key, const std::string& help) {
  const std::string name = key.size() == 1 ? "-" + key + ",--" + key : "--" + key;
  sub->add_option(name, c.values[key], help);
}

RunConfig resolve(const std::string& subcommand, CLI::App* sub, Collected& c) {
  RunConfig cfg;
  cfg.subcommand = subcommand;
  std::vector<ConfigEntry> file_entries;
  if (!c.config.empty()) file_entries = parse_key_values(read_text_file(c.config));

  std::vector<std::pair<std::string, std::string>> flags;
  for (const auto& [key, value] : c.values) {
    const std::string name = key.size() == 1 ? "-" + key : "--" + key;
    if (sub->count(name) > 0) flags.emplace_back(key, value);
  }
  for (const auto& q : c.queries) flags.emplace_back("query", q);

  std::optional<std::string> preset;
  for (const auto& e : file_entries) {
    if (e.key == "preset") preset = e.value;
  }
  for (const auto& [k, v] : flags) {
    if (k == "preset") preset = v;
  }
  if (preset) {
    cfg.preset = preset;
    apply_preset(cfg.train, find_preset(*preset));
  }
  for (const auto& e : file_entries) {
    if (e.key == "preset") continue;
    try {
      apply_run_option(cfg, e.key, e.value);
    } catch (const ConfigError& ex) {
      throw ConfigError(c.config + ":" + std::to_string(e.line) + ": " + ex.what());
    }
  }
  for (const auto& [k, v] : flags) {
    if (k != "preset") apply_run_option(cfg, k, v);
  }
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge graph embedding with matrix relations"};
  app.require_subcommand(1);

  std::map<std::string, Collected> collected;
  auto make = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    auto& c = collected[name];
    sub->add_option("--config", c.config, "key = value file mirroring flag names")->check(CLI::ExistingFile);
    add_value(sub, c, "out", "output directory");
    return sub;
  };

  auto* train_cmd = make("train", "train a model and write out/model.ckpt");
  {
    auto& c = collected["train"];
    add_value(train_cmd, c, "dataset", "directory holding train.txt, valid.txt, test.txt");
    add_value(train_cmd, c, "preset", "fb15k | wn18 | fb15k-237 | wn18rr | yago3-10");
    for (const auto& k : kTrainKeys) add_value(train_cmd, c, k, k);
    train_cmd->add_flag("--filter-false-negatives{true}", c.values["filter-false-negatives"],
                        "redraw corruptions that are known train triples");
  }
  auto* eval_cmd = make("eval", "filtered ranking of a checkpoint on valid or test");
  {
    auto& c = collected["eval"];
    for (const auto& k : {"dataset", "checkpoint", "eval-seed", "workers", "category-threshold", "split"}) {
      add_value(eval_cmd, c, k, k);
    }
  }
  auto* analyze_cmd = make("analyze", "relation-pattern diagnostics and heatmaps");
  {
    auto& c = collected["analyze"];
    add_value(analyze_cmd, c, "dataset", "dataset the checkpoint was trained on");
    add_value(analyze_cmd, c, "checkpoint", "checkpoint file");
    analyze_cmd->add_option("--query", c.queries, "e.g. \"inversion r1 r2\"; repeatable");
  }
  auto* synth_cmd = make("synth", "generate a synthetic dataset with planted patterns");
  add_value(synth_cmd, collected["synth"], "spec", "synthetic spec file");
  auto* inspect_cmd = app.add_subcommand("inspect", "print checkpoint header and metadata");
  add_value(inspect_cmd, collected["inspect"], "checkpoint", "checkpoint file");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << app.help();
        return 0;
      }
      err << "error: " << e.what() << '\n';
      return 1;
    }
    for (auto* sub : app.get_subcommands()) {
      const std::string name = sub->get_name();
      const auto cfg = resolve(name, sub, collected[name]);
      if (name == "train") return run_train(cfg, out, err);
      if (name == "eval") return run_eval(cfg, out, err);
      if (name == "analyze") return run_analyze(cfg, out, err);
      if (name == "synth") return run_synth(cfg, out, err);
      if (name == "inspect") return run_inspect(cfg, out, err);
    }
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace spacee::cli
