#pragma once

// Command-line driver. run_cli() is the whole program; main() only forwards
// to it so tests can drive the pipeline in-process.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entangle/entangle.hpp"
#include "entangle/icl_http.hpp"

namespace entangle::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode { kOk = 0, kIo = 1, kValidation = 2, kNumerical = 3 };

struct AnalysisConfig {
  double eps = 0.5;
  std::size_t min_pts = 2;
};

struct IclConfig {
  std::size_t n = 100;
  std::size_t workers = 4;
  std::string endpoint;
  std::string token_env = "ENTANGLE_ICL_TOKEN";
  std::string mock;
  GenerationParams generation;
};

/// Parsed run configuration. Every section is optional in the file; flags
/// override file values.
struct RunConfig {
  std::optional<FixtureSpec> fixture;
  std::optional<TransformPlan> plan;
  EncoderConfig encoder;
  LossConfig loss;
  TrainConfig train;
  AnalysisConfig analysis;
  IclConfig icl;
  std::optional<std::uint64_t> seed;
};

inline RunConfig parse_config(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"fixture", "plan", "encoder", "loss", "train", "analysis", "icl", "seed"},
                              "config");
  RunConfig c;
  if (j.contains("fixture")) c.fixture = fixture_spec_from_json(j.at("fixture"));
  if (j.contains("plan")) c.plan = plan_from_json(j.at("plan"));
  if (j.contains("encoder")) c.encoder = encoder_config_from_json(j.at("encoder"));
  if (j.contains("loss")) c.loss = loss_config_from_json(j.at("loss"));
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  try {
    if (j.contains("analysis")) {
      const auto& a = j.at("analysis");
      detail::reject_unknown_keys(a, {"eps", "min_pts"}, "analysis");
      c.analysis.eps = a.value("eps", c.analysis.eps);
      c.analysis.min_pts = a.value("min_pts", c.analysis.min_pts);
    }
    if (j.contains("icl")) {
      const auto& a = j.at("icl");
      detail::reject_unknown_keys(
          a, {"n", "workers", "endpoint", "token_env", "mock", "temperature", "max_tokens", "model"}, "icl");
      c.icl.n = a.value("n", c.icl.n);
      c.icl.workers = a.value("workers", c.icl.workers);
      c.icl.endpoint = a.value("endpoint", c.icl.endpoint);
      c.icl.token_env = a.value("token_env", c.icl.token_env);
      c.icl.mock = a.value("mock", c.icl.mock);
      c.icl.generation.temperature = a.value("temperature", c.icl.generation.temperature);
      c.icl.generation.max_tokens = a.value("max_tokens", c.icl.generation.max_tokens);
      c.icl.generation.model = a.value("model", c.icl.generation.model);
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!(c.analysis.eps > 0 && c.analysis.eps <= 1)) throw ValidationError("analysis.eps must be in (0, 1]");
  if (c.analysis.min_pts < 1) throw ValidationError("analysis.min_pts must be >= 1");
  if (c.icl.workers < 1) throw ValidationError("icl.workers must be >= 1");
  return c;
}

/// A global seed replaces every section's own seed.
inline void apply_seed(RunConfig& c, std::uint64_t seed) {
  c.seed = seed;
  if (c.fixture) c.fixture->seed = seed;
  if (c.plan) c.plan->seed = seed;
  c.train.seed = seed;
}

inline ojson to_json(const RunConfig& c) {
  ojson j;
  if (c.fixture) j["fixture"] = to_json(*c.fixture);
  if (c.plan) j["plan"] = to_json(*c.plan);
  j["encoder"] = to_json(c.encoder);
  j["loss"] = to_json(c.loss);
  j["train"] = to_json(c.train);
  j["analysis"] = {{"eps", c.analysis.eps}, {"min_pts", c.analysis.min_pts}};
  j["icl"] = {{"n", c.icl.n},
              {"workers", c.icl.workers},
              {"endpoint", c.icl.endpoint},
              {"token_env", c.icl.token_env},
              {"mock", c.icl.mock},
              {"temperature", c.icl.generation.temperature},
              {"max_tokens", c.icl.generation.max_tokens},
              {"model", c.icl.generation.model}};
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

/// Tracks inputs and outputs of one subcommand and writes its manifest.
class Run {
 public:
  Run(std::string command, fs::path out_dir, ojson config)
      : command_(std::move(command)), out_(std::move(out_dir)), config_(std::move(config)),
        start_(std::chrono::steady_clock::now()) {}

  const fs::path& out_dir() const { return out_; }

  /// Registers an input; a missing file is a validation failure.
  fs::path input(const fs::path& p) {
    if (!fs::exists(p)) throw ValidationError("missing artifact '" + p.string() + "'");
    inputs_[p.string()] = io::file_checksum(p);
    return p;
  }

  fs::path output(const fs::path& rel, std::string_view bytes) {
    const auto p = out_ / rel;
    io::write_file_atomic(p, bytes);
    outputs_[p.string()] = hex64(fnv1a64(bytes));
    return p;
  }

  /// Registers a file written by a library call.
  void record_output(const fs::path& p) { outputs_[p.string()] = io::file_checksum(p); }

  void finish() {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    ojson m;
    m["tool"] = "entangle";
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["config"] = config_;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["wall_time_s"] = wall;
    io::write_file_atomic(out_ / ("manifest." + command_ + ".json"), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_;
  ojson config_;
  std::map<std::string, std::string> inputs_, outputs_;
  std::chrono::steady_clock::time_point start_;
};

inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

inline Corpus load_split(Run& run, const fs::path& dir, Split s) {
  return load_corpus(run.input(dir / (std::string(to_string(s)) + ".jsonl")), s);
}

inline std::string predictions_jsonl(const std::vector<std::string>& ids,
                                     const std::vector<std::vector<LabelId>>& preds) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ojson j{{"id", ids[i]}, {"labels", ojson::array()}};
    for (const auto& l : preds[i]) j["labels"].push_back(l.str());
    out += j.dump() + "\n";
  }
  return out;
}

/// id -> predicted labels, in file order.
inline std::vector<std::pair<std::string, std::vector<LabelId>>> load_predictions(const fs::path& p) {
  std::vector<std::pair<std::string, std::vector<LabelId>>> out;
  std::istringstream in(io::read_file(p));
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      detail::reject_unknown_keys(j, {"id", "labels"}, "prediction");
      std::vector<LabelId> ls;
      for (const auto& l : j.at("labels")) ls.emplace_back(l.get<std::string>());
      auto id = j.at("id").get<std::string>();
      if (!seen.insert(id).second) throw ValidationError("duplicate prediction for '" + id + "'");
      out.emplace_back(std::move(id), sorted_unique(std::move(ls)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

/// Predictions aligned to the gold corpus order; every gold id needs one.
inline std::vector<std::vector<LabelId>> align_predictions(
    const std::vector<std::pair<std::string, std::vector<LabelId>>>& preds, const Corpus& gold) {
  std::map<std::string, const std::vector<LabelId>*> by_id;
  for (const auto& [id, ls] : preds) by_id[id] = &ls;
  std::vector<std::vector<LabelId>> out;
  for (const auto& r : gold.records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw ValidationError("no prediction for record '" + r.id + "'");
    out.push_back(*it->second);
  }
  if (by_id.size() != gold.records.size()) throw ValidationError("predictions contain ids not in the gold corpus");
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

inline fs::path seed_dir(const fs::path& base, std::uint64_t seed) { return base / ("seed-" + std::to_string(seed)); }

// ---- subcommands -----------------------------------------------------------

inline void cmd_fixture(const RunConfig& cfg, Run& run) {
  const auto spec = cfg.fixture.value_or(FixtureSpec{});
  const auto fx = generate_fixture(spec);
  run.output("train.jsonl", serialize_corpus(fx.train));
  run.output("valid.jsonl", serialize_corpus(fx.valid));
  run.output("test.jsonl", serialize_corpus(fx.test));
  run.output("fixture.json", dump(to_json(spec)));
}

inline void cmd_ingest(Run& run, const fs::path& input, const std::string& split, const std::string& name) {
  const auto s = parse_split(split);
  auto c = load_corpus(run.input(input), s);
  if (!name.empty()) c.name = name;
  run.output(std::string(to_string(s)) + ".jsonl", serialize_corpus(c));
  run.output(std::string(to_string(s)) + ".stats.json", dump(to_json(corpus_stats(c))));
}

inline TransformPlan configured_plan(const RunConfig& cfg) {
  if (cfg.plan) return *cfg.plan;
  if (cfg.fixture) return fixture_plan(*cfg.fixture, cfg.seed.value_or(0));
  throw ValidationError("config has neither a plan nor a fixture section");
}

inline void cmd_transform(const RunConfig& cfg, Run& run, const fs::path& data) {
  const auto train = load_split(run, data, Split::Train);
  const auto valid = load_split(run, data, Split::Valid);
  const auto test = load_split(run, data, Split::Test);
  auto plan = resolve_plan(configured_plan(cfg), train);
  if (plan.difficulty) plan = difficulty_filter(plan, plan.difficulty->mode, plan.difficulty->k, train);
  const auto reg = registry_from_plan(plan);
  const auto tr = transform_train(train, plan);
  const auto va = build_eval_labels(valid, reg);
  const auto te = build_eval_labels(test, reg);
  run.output("train.jsonl", serialize_corpus(tr));
  run.output("valid.jsonl", serialize_corpus(va));
  run.output("test.jsonl", serialize_corpus(te));
  run.output("registry.json", dump(reg.to_json_obj()));
  run.output("plan.json", dump(to_json(plan)));
  run.output("stats.json", dump(to_json(transform_stats(train, tr, reg))));
}

inline void cmd_stats(Run& run, const std::vector<fs::path>& inputs) {
  ojson j = ojson::object();
  for (const auto& p : inputs) {
    const auto c = load_corpus(run.input(p), Split::Train);
    j[p.filename().string()] = to_json(corpus_stats(c));
  }
  run.output("corpus_stats.json", dump(j));
}

inline void train_one(const RunConfig& cfg, Run& run, const Corpus& tr, const Corpus& va, const fs::path& rel) {
  const auto res = train(tr, va, cfg.encoder, cfg.loss, cfg.train);
  const auto manifest = run.out_dir() / rel / "model.json";
  save_model(ModelArtifact{res.params, cfg.loss, cfg.train}, manifest);
  run.record_output(manifest);
  run.record_output(weights_path(manifest));
  ojson h = ojson::array();
  for (const auto& e : res.history) h.push_back(to_json(e));
  run.output(rel / "history.json", dump(h));
}

inline void cmd_train(RunConfig cfg, Run& run, const fs::path& data, const std::vector<std::uint64_t>& seeds) {
  const auto tr = load_split(run, data, Split::Train);
  Corpus va;
  if (fs::exists(data / "valid.jsonl")) va = load_split(run, data, Split::Valid);
  if (seeds.empty()) {
    train_one(cfg, run, tr, va, fs::path{});
    return;
  }
  for (auto s : seeds) {
    cfg.train.seed = s;
    train_one(cfg, run, tr, va, fs::path("seed-" + std::to_string(s)));
  }
}

inline std::vector<fs::path> model_paths(const fs::path& model, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) return {model};
  std::vector<fs::path> out;
  for (auto s : seeds) out.push_back(seed_dir(model.parent_path(), s) / model.filename());
  return out;
}

inline std::vector<std::vector<LabelId>> predict_all(const ModelParameters& p, const Corpus& c) {
  std::vector<std::vector<LabelId>> out;
  out.reserve(c.records.size());
  for (const auto& r : c.records) out.push_back(predict(p, r.text));
  return out;
}

inline std::vector<std::string> ids_of(const Corpus& c) {
  std::vector<std::string> ids;
  for (const auto& r : c.records) ids.push_back(r.id);
  return ids;
}

inline void cmd_predict(Run& run, const fs::path& model, const fs::path& input,
                        const std::vector<std::uint64_t>& seeds) {
  const auto c = load_corpus(run.input(input), Split::Test);
  for (const auto& mp : model_paths(model, seeds)) {
    const auto a = load_model(run.input(mp));
    const auto rel = seeds.empty() ? fs::path("predictions.jsonl")
                                   : fs::relative(mp.parent_path(), model.parent_path()) / "predictions.jsonl";
    run.output(rel, predictions_jsonl(ids_of(c), predict_all(a.params, c)));
  }
}

inline Metrics eval_into(Run& run, const fs::path& rel, const std::vector<std::vector<LabelId>>& preds,
                         const Corpus& gold) {
  MetricAccumulator acc(gold.inventory);
  for (std::size_t i = 0; i < preds.size(); ++i) acc.accumulate(preds[i], gold.records[i].labels);
  run.output(rel, dump(metrics_report(acc)));
  return acc.finalize();
}

/// Evaluates a prediction file, or a model (per seed with --seeds) on the
/// gold corpus. Multi-seed runs add a report with one row per seed and the
/// per-column median.
inline void cmd_eval(Run& run, const fs::path& gold_path, const std::optional<fs::path>& predictions,
                     const std::optional<fs::path>& model, const std::vector<std::uint64_t>& seeds) {
  const auto gold = load_corpus(run.input(gold_path), Split::Test);
  if (predictions) {
    eval_into(run, "metrics.json", align_predictions(load_predictions(run.input(*predictions)), gold), gold);
    return;
  }
  if (!model) throw ValidationError("eval needs --predictions or --model");
  std::vector<Metrics> rows;
  for (const auto& mp : model_paths(*model, seeds)) {
    const auto a = load_model(run.input(mp));
    if (a.params.inventory != gold.inventory)
      throw ValidationError("model inventory does not match the gold corpus inventory");
    const auto rel = seeds.empty() ? fs::path("metrics.json")
                                   : fs::relative(mp.parent_path(), model->parent_path()) / "metrics.json";
    rows.push_back(eval_into(run, rel, predict_all(a.params, gold), gold));
  }
  if (seeds.empty()) return;
  ojson rep;
  rep["rows"] = ojson::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = to_json(rows[i]);
    r["seed"] = seeds[i];
    rep["rows"].push_back(r);
  }
  auto col = [&](auto f) {
    std::vector<double> v;
    for (const auto& m : rows) v.push_back(f(m));
    return pct2(median(v));
  };
  rep["median"] = {{"precision", col([](const Metrics& m) { return m.precision; })},
                   {"recall", col([](const Metrics& m) { return m.recall; })},
                   {"f1", col([](const Metrics& m) { return m.f1; })},
                   {"em", col([](const Metrics& m) { return m.em; })}};
  run.output("metrics_seeds.json", dump(rep));
}

inline void cmd_analyze(const RunConfig& cfg, Run& run, const fs::path& predictions, const fs::path& gold_path,
                        const fs::path& registry_path) {
  const auto gold = load_corpus(run.input(gold_path), Split::Test);
  const auto preds = align_predictions(load_predictions(run.input(predictions)), gold);
  FamilyRegistry reg;
  try {
    reg = FamilyRegistry::from_json_obj(nlohmann::json::parse(io::read_file(run.input(registry_path))));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("registry: " + std::string(e.what()));
  }
  const auto C = cooccurrence(preds, gold.inventory);
  const auto D = cooccurrence_distance(C);
  const auto n = gold.inventory.size();
  ClusterAssignment a{gold.inventory, dbscan(D, n, cfg.analysis.eps, cfg.analysis.min_pts)};
  run.output("cooccurrence.csv", cooccurrence_csv(C));
  run.output("clusters.json", dump(to_json(a)));
  run.output("coordinates.csv", coordinates_csv(gold.inventory, mds_coordinates(D, n)));
  ojson j;
  j["eps"] = cfg.analysis.eps;
  j["min_pts"] = cfg.analysis.min_pts;
  j["clusters"] = a.cluster.empty() ? 0 : *std::max_element(a.cluster.begin(), a.cluster.end()) + 1;
  if (!reg.empty()) {
    j["family_recovery"] = family_recovery(a, reg);
    for (auto k : {FamilyKind::Version, FamilyKind::Split, FamilyKind::Composite}) {
      const auto fams = reg.families();
      if (std::any_of(fams.begin(), fams.end(), [&](const Family& f) { return f.kind == k; }))
        j["family_recovery_" + std::string(to_string(k))] = family_recovery(a, reg, k);
    }
  }
  run.output("analysis.json", dump(j));
}

inline void cmd_icl_eval(const RunConfig& cfg, Run& run, const fs::path& data, bool oracle,
                         const std::string& write_mock) {
  const auto tr = load_split(run, data, Split::Train);
  const auto te = load_split(run, data, Split::Test);
  const auto subset = sample_eval_subset(te, std::min(cfg.icl.n, te.records.size()), cfg.seed.value_or(0));
  std::unique_ptr<CompletionTransport> transport;
  if (oracle) {
    auto t = oracle_transport(tr, subset, te.inventory);
    if (!write_mock.empty()) run.output(write_mock, dump(t.to_json()));
    transport = std::make_unique<MockTransport>(std::move(t));
  } else if (!cfg.icl.mock.empty()) {
    transport = std::make_unique<MockTransport>(MockTransport::from_file(run.input(cfg.icl.mock)));
  } else if (!cfg.icl.endpoint.empty()) {
    transport = std::make_unique<HttpTransport>(cfg.icl.endpoint, cfg.icl.token_env);
  } else {
    throw ValidationError("icl-eval needs --oracle, icl.mock or icl.endpoint");
  }
  const auto res = run_icl_eval(*transport, tr, subset, te.inventory, cfg.icl.generation, cfg.icl.workers);
  auto j = to_json(res.metrics);
  j["failures"] = res.failures;
  run.output("icl_metrics.json", dump(j));
  run.output("icl_transcript.jsonl", transcript_jsonl(res.transcript));
}

// ---- entry point -----------------------------------------------------------

inline int run_cli(int argc, char** argv, std::ostream& err = std::cerr) {
  CLI::App app{"Entangled-label benchmark toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Global seed; overrides every seed in the config");
  app.add_option("--seeds", seeds, "Comma-separated seeds for multi-seed train/predict/eval")->delimiter(',');
  app.add_option("--out-dir", out_dir, "Output directory");
  app.set_version_flag("--version", std::string(kToolVersion));

  auto* fixture = app.add_subcommand("fixture", "Generate the synthetic fixture corpora");

  std::string input, split = "train", name;
  auto* ingest = app.add_subcommand("ingest", "Validate and canonicalize a corpus file");
  ingest->add_option("--input", input)->required();
  ingest->add_option("--split", split);
  ingest->add_option("--name", name);

  std::string data_dir;
  auto* transform = app.add_subcommand("transform", "Apply the entanglement transformations");
  transform->add_option("--data-dir", data_dir, "Directory with train/valid/test.jsonl")->required();

  std::vector<std::string> stats_inputs;
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  stats->add_option("inputs", stats_inputs)->required();

  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  train_cmd->add_option("--data-dir", data_dir)->required();

  std::string model, gold, predictions, registry, write_mock;
  auto* predict_cmd = app.add_subcommand("predict", "Predict label sets");
  predict_cmd->add_option("--model", model)->required();
  predict_cmd->add_option("--input", input)->required();

  auto* eval = app.add_subcommand("eval", "Score predictions or a model");
  eval->add_option("--gold", gold)->required();
  auto* eval_pred = eval->add_option("--predictions", predictions);
  auto* eval_model = eval->add_option("--model", model);
  eval_pred->excludes(eval_model);

  auto* analyze = app.add_subcommand("analyze", "Co-occurrence clustering and family recovery");
  analyze->add_option("--predictions", predictions)->required();
  analyze->add_option("--gold", gold)->required();
  analyze->add_option("--registry", registry)->required();

  bool oracle = false;
  auto* icl = app.add_subcommand("icl-eval", "In-context-learning evaluation");
  icl->add_option("--data-dir", data_dir)->required();
  icl->add_flag("--oracle", oracle, "Answer with gold labels through an in-memory mock");
  icl->add_option("--write-mock", write_mock, "With --oracle, also save the mock replay file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, std::cout, err);
      return kOk;
    }
    app.exit(e, std::cout, err);
    return kValidation;
  }

  try {
    RunConfig cfg;
    nlohmann::json raw = nlohmann::json::object();
    if (!config_path.empty()) {
      try {
        raw = nlohmann::json::parse(io::read_file(config_path));
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config '" + config_path + "': " + e.what());
      }
    }
    cfg = parse_config(raw);
    if (seed) apply_seed(cfg, *seed);
    else if (cfg.seed) apply_seed(cfg, *cfg.seed);

    auto* sub = app.get_subcommands().front();
    Run run(sub->get_name(), out_dir, to_json(cfg));
    if (!config_path.empty()) run.input(config_path);
    if (sub == fixture) cmd_fixture(cfg, run);
    else if (sub == ingest) cmd_ingest(run, input, split, name);
    else if (sub == transform) cmd_transform(cfg, run, data_dir);
    else if (sub == stats) cmd_stats(run, {stats_inputs.begin(), stats_inputs.end()});
    else if (sub == train_cmd) cmd_train(cfg, run, data_dir, seeds);
    else if (sub == predict_cmd) cmd_predict(run, model, input, seeds);
    else if (sub == eval)
      cmd_eval(run, gold, predictions.empty() ? std::nullopt : std::optional<fs::path>(predictions),
               model.empty() ? std::nullopt : std::optional<fs::path>(model), seeds);
    else if (sub == analyze) cmd_analyze(cfg, run, predictions, gold, registry);
    else if (sub == icl) cmd_icl_eval(cfg, run, data_dir, oracle, write_mock);
    run.finish();
    return kOk;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const TransportError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
}

}  // namespace entangle::cli
