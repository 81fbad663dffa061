// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"

using namespace entangle;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& s) {
    if (!pass) return;
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<LabelId> inventory(std::size_t n) {
  std::vector<LabelId> v;
  for (std::size_t i = 0; i < n; ++i) v.emplace_back("l" + std::to_string(i));
  return v;
}

cli::RunConfig load_config(const std::string& name) {
  return cli::parse_config(
      nlohmann::json::parse(io::read_file(fs::path(ENTANGLE_CONFIG_DIR) / name)));
}

// ---- 1 ----------------------------------------------------------------------

Check metric_oracle() {
  Check c;
  Rng rng(1);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inv = inventory(1 + rng.uniform_index(8));
    const auto n = 1 + rng.uniform_index(20);
    MetricAccumulator acc(inv);
    std::uint64_t hit = 0, np = 0, ng = 0, em = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<LabelId> p, g;
      for (const auto& l : inv) {
        if (rng.uniform_index(3) == 0) p.push_back(l);
        if (rng.uniform_index(3) == 0) g.push_back(l);
      }
      if (g.empty()) g.push_back(inv[rng.uniform_index(inv.size())]);
      acc.accumulate(p, g);
      bool same = p.size() == g.size();
      for (const auto& l : p) {
        const bool in = std::find(g.begin(), g.end(), l) != g.end();
        hit += in;
        same = same && in;
      }
      np += p.size();
      ng += g.size();
      em += same;
    }
    const double P = np ? double(hit) / double(np) : 0.0;
    const double R = double(hit) / double(ng);
    const double F = P + R > 0 ? 2 * P * R / (P + R) : 0.0;
    const double E = double(em) / double(n);
    const auto m = acc.finalize();
    if (m.precision != P || m.recall != R || m.f1 != F || m.em != E) ++mismatches;
  }
  c.require(mismatches == 0, std::to_string(mismatches) + " of 1000 cases differ");
  c.note("1000 cases exact");
  return c;
}

// ---- 2 ----------------------------------------------------------------------

double fd_error(const std::function<LossResult(std::span<const double>)>& f, std::vector<double> s) {
  const double h = 1e-5;
  const auto g = f(s).grad;
  double worst = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double keep = s[i];
    s[i] = keep + h;
    const double up = f(s).value;
    s[i] = keep - h;
    const double down = f(s).value;
    s[i] = keep;
    const double num = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(num - g[i]) / std::max({std::abs(num), std::abs(g[i]), 1e-2}));
  }
  return worst;
}

Check gradients() {
  Check c;
  Rng rng(2);
  std::map<std::string, double> worst;
  for (int k = 0; k < 100; ++k) {
    const auto n = 2 + rng.uniform_index(7);
    std::vector<double> s(n);
    for (auto& x : s) x = (rng.uniform01() * 2 - 1) * 6;
    std::vector<double> t(n, 0.0);
    std::vector<std::uint8_t> mask(n, 0);
    const std::size_t pos = rng.uniform_index(n);
    t[pos] = 1.0;
    mask[pos] = 1;
    const auto smooth = smooth_labels(t, 0.1, n);
    const auto negs = sample_negatives(rng, pos, n, 1 + rng.uniform_index(n - 1));
    const std::size_t ps[1] = {pos};
    const double s0 = rng.uniform01() * 2 - 1;
    worst["bce"] = std::max(worst["bce"], fd_error([&](auto z) { return loss_bce(z, t); }, s));
    worst["neg_sample"] =
        std::max(worst["neg_sample"], fd_error([&](auto z) { return loss_neg_sample(z, ps, negs); }, s));
    worst["ls_focal"] = std::max(
        worst["ls_focal"], fd_error([&](auto z) { return loss_ls_focal(z, smooth, 4.0, 0.99999, 1e-5); }, s));
    worst["mlce"] = std::max(worst["mlce"], fd_error([&](auto z) { return loss_mlce(z, mask, s0); }, s));
  }
  for (const auto& [k, v] : worst) {
    c.require(v < 1e-4, k + " max rel err " + fmt("%.2e", v));
    c.note(k + " " + fmt("%.1e", v));
  }
  return c;
}

// ---- 3 ----------------------------------------------------------------------

Check identities() {
  Check c;
  Rng rng(3);
  double a = 0, b = 0, cc = 0;
  for (int k = 0; k < 100; ++k) {
    const auto n = 2 + rng.uniform_index(7);
    std::vector<double> s(n), l(n, 0.0);
    for (auto& x : s) x = (rng.uniform01() * 2 - 1) * 8;
    const auto pos = rng.uniform_index(n);
    l[pos] = 1.0;
    const auto same = smooth_labels(l, 0.0, n);
    for (std::size_t i = 0; i < n; ++i) a = std::max(a, std::abs(same[i] - l[i]));
    b = std::max(b, std::abs(loss_ls_focal(s, same, 0.0, 0.5, 0.5).value - 0.5 * loss_bce(s, l).value));
    std::vector<std::uint8_t> mask(n, 0);
    mask[pos] = 1;
    double z = 0;
    for (double x : s) z += std::exp(x);
    cc = std::max(cc, std::abs(loss_mlce(s, mask, 0.0, MlceForm::Pairwise).value - (std::log(z) - s[pos])));
  }
  const std::vector<double> zeros = {0.0, 0.0};
  const std::vector<std::uint8_t> one = {1, 0};
  const double d = std::abs(loss_mlce(zeros, one, 0.0).value - 2 * std::log(2.0));
  c.require(a == 0.0, "(a) smoothing with beta 0 changed labels");
  c.require(b <= 1e-9, "(b) focal vs half BCE off by " + fmt("%.2e", b));
  c.require(cc <= 1e-9, "(c) mlce vs softmax CE off by " + fmt("%.2e", cc));
  c.require(d <= 1e-12, "(d) mlce zeros off by " + fmt("%.2e", d));
  c.note("(b) " + fmt("%.1e", b) + " (c) " + fmt("%.1e", cc) + " (d) " + fmt("%.1e", d));
  return c;
}

// ---- 4 ----------------------------------------------------------------------

/// Closure written out from the fixture layout, not from the registry.
std::set<std::string> fixture_closure(const Record& r, const FixtureSpec& spec) {
  const std::string first = r.labels.front().str();
  const int fam = std::stoi(first.substr(6, 2));
  const std::string base = fixture_intent_name(fam);
  if (fam < spec.versioned_count) return {base + "@v1", base + "@v2"};
  if (fam < spec.versioned_count + spec.entity_split_count) {
    const auto pivot = fixture_pivot_type(fam);
    return {base, base + (r.has_entity(pivot) ? "#with_" : "#without_") + pivot};
  }
  if (r.labels.size() == 2) return {base + "a", base + "b", base + "a&" + base + "b"};
  return {first};
}

std::set<std::string> as_set(const std::vector<LabelId>& ls) {
  std::set<std::string> s;
  for (const auto& l : ls) s.insert(l.str());
  return s;
}

Check transform_invariants() {
  Check c;
  const FixtureSpec spec;
  const auto fx = generate_fixture(spec);
  const auto plan = resolve_plan(fixture_plan(spec, 11), fx.train);
  const auto reg = registry_from_plan(plan);
  const auto tr = transform_train(fx.train, plan);
  std::size_t multi = 0, outside = 0, bad_gold = 0;
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& r = tr.records[i];
    if (r.labels.size() != 1) ++multi;
    const auto want = fixture_closure(fx.train.records[i], spec);
    if (!want.count(r.labels.front().str())) ++outside;
    if (as_set(r.gold.empty() ? r.labels : r.gold) != want) ++bad_gold;
  }
  for (const Corpus* split : {&fx.valid, &fx.test}) {
    const auto ev = build_eval_labels(*split, reg);
    for (std::size_t i = 0; i < ev.records.size(); ++i)
      if (as_set(ev.records[i].labels) != fixture_closure(split->records[i], spec)) ++bad_gold;
  }
  const bool same = serialize_corpus(transform_train(generate_fixture(spec).train, plan)) == serialize_corpus(tr) &&
                    serialize_corpus(build_eval_labels(fx.test, reg)) ==
                        serialize_corpus(build_eval_labels(generate_fixture(spec).test, reg));
  c.require(multi == 0, std::to_string(multi) + " PU records with more than one label");
  c.require(outside == 0, std::to_string(outside) + " training labels outside the closure");
  c.require(bad_gold == 0, std::to_string(bad_gold) + " gold sets differ from the closure");
  c.require(same, "rerun is not byte-identical");
  c.note(std::to_string(tr.records.size()) + " train records");
  return c;
}

// ---- 5 ----------------------------------------------------------------------

Record rec(std::string id, std::vector<std::string> labels, bool with_e = false) {
  Record r;
  r.id = std::move(id);
  r.text = "some words here";
  for (auto& l : labels) r.labels.emplace_back(l);
  if (with_e) r.entities.push_back({"e", 0, 4, ""});
  return r;
}

Check stats_fidelity() {
  Check c;
  // A versioned (3 records), B split on e (2), C&D composite (2), E plain (1)
  Corpus micro;
  micro.records = {rec("r1", {"A"}), rec("r2", {"A"}), rec("r3", {"A"}), rec("r4", {"B"}, true),
                   rec("r5", {"B"}), rec("r6", {"C", "D"}), rec("r7", {"C", "D"}), rec("r8", {"E"})};
  validate_corpus(micro);
  TransformPlan p;
  p.version_targets = {{"A", 2}};
  p.entity_splits = {{"B", "e"}};
  p.composite_split = true;
  p.seed = 1;
  p = resolve_plan(p, micro);
  auto s = transform_stats(micro, transform_train(micro, p), registry_from_plan(p));
  // labels: A@v1 A@v2 B B#with_e B#without_e C C&D D E
  c.require(s.vc_n == 2 && s.mf_n == 2 && s.total_labels == 9 && s.vc_r == 37.5 && s.mf_r == 50.0,
            "micro corpus stats differ from the hand count");

  // 25 intents in two versions, 10 composites over 6 atoms
  Corpus atis;
  int id = 0;
  for (int i = 0; i < 25; ++i)
    for (int k = 0; k < 4; ++k) atis.records.push_back(rec("a" + std::to_string(id++), {"v" + std::to_string(i)}));
  const std::vector<std::string> atoms = {"m0", "m1", "m2", "m3", "m4", "m5"};
  TransformPlan q;
  int pairs = 0;
  for (std::size_t x = 0; x < atoms.size() && pairs < 10; ++x)
    for (std::size_t y = x + 1; y < atoms.size() && pairs < 10; ++y, ++pairs) {
      atis.records.push_back(rec("a" + std::to_string(id++), {atoms[x], atoms[y]}));
      q.composite_targets.push_back({atoms[x], atoms[y]});
    }
  for (const auto& a : atoms) atis.records.push_back(rec("a" + std::to_string(id++), {a}));
  validate_corpus(atis);
  for (int i = 0; i < 25; ++i) q.version_targets.push_back({"v" + std::to_string(i), 2});
  q.composite_split = true;
  q.seed = 3;
  q = resolve_plan(q, atis);
  const auto t = transform_stats(atis, transform_train(atis, q), registry_from_plan(q));
  c.require(t.vc_n == 50 && t.mf_n == 10 && t.total_labels == 66,
            "ATIS-shaped plan gives VC-N " + std::to_string(t.vc_n) + ", MF-N " + std::to_string(t.mf_n) +
                ", total " + std::to_string(t.total_labels));
  c.note("micro exact; VC-N 50, MF-N 10, total 66 (" + fmt("%.1f", t.vc_label_pct) + "% / " +
         fmt("%.1f", t.mf_label_pct) + "%)");
  return c;
}

// ---- 6, 7 -------------------------------------------------------------------

struct FixtureRun {
  FixtureSpec spec;
  FamilyRegistry reg;
  Corpus train, valid, test;
};

FixtureRun prepare_fixture(const FixtureSpec& spec, std::uint64_t plan_seed,
                           std::optional<Difficulty> mode = std::nullopt) {
  FixtureRun f{spec, {}, {}, {}, {}};
  const auto fx = generate_fixture(spec);
  auto plan = resolve_plan(fixture_plan(spec, plan_seed), fx.train);
  if (mode) plan = difficulty_filter(plan, *mode, 1, fx.train);
  f.reg = registry_from_plan(plan);
  f.train = transform_train(fx.train, plan);
  f.valid = build_eval_labels(fx.valid, f.reg);
  f.test = build_eval_labels(fx.test, f.reg);
  return f;
}

std::vector<std::vector<LabelId>> predict_all(const ModelParameters& p, const Corpus& c) {
  std::vector<std::vector<LabelId>> out;
  for (const auto& r : c.records) out.push_back(predict(p, r.text));
  return out;
}

Metrics score(const std::vector<std::vector<LabelId>>& preds, const Corpus& gold) {
  MetricAccumulator acc(gold.inventory);
  for (std::size_t i = 0; i < preds.size(); ++i) acc.accumulate(preds[i], gold.records[i].labels);
  return acc.finalize();
}

double version_recovery(const std::vector<std::vector<LabelId>>& preds, const FixtureRun& f, double eps,
                        std::size_t min_pts, std::optional<FamilyKind> kind) {
  const auto D = cooccurrence_distance(cooccurrence(preds, f.test.inventory));
  const ClusterAssignment a{f.test.inventory, dbscan(D, f.test.inventory.size(), eps, min_pts)};
  return family_recovery(a, f.reg, kind);
}

std::string describe(const Metrics& m) {
  return "P " + fmt("%.3f", m.precision) + " R " + fmt("%.3f", m.recall) + " F1 " + fmt("%.3f", m.f1) + " EM " +
         fmt("%.3f", m.em);
}

std::vector<std::vector<LabelId>> g_focal_predictions;
FixtureRun g_fixture;

Check core_finding() {
  Check c;
  const auto base = load_config("fixture.json");
  g_fixture = prepare_fixture(*base.fixture, 11);
  std::map<std::string, Metrics> got;
  for (const auto& [name, file] : std::vector<std::pair<std::string, std::string>>{
           {"bce", "fixture-bce.json"},
           {"ls_focal", "fixture.json"},
           {"mlce", "fixture-mlce.json"},
           {"neg_sample", "fixture-neg-sample.json"},
           {"upper_bound", "fixture-upper-bound.json"}}) {
    const auto cfg = load_config(file);
    c.require(cfg.fixture == base.fixture, file + " uses a different fixture");
    const auto model = train(g_fixture.train, g_fixture.valid, cfg.encoder, cfg.loss, cfg.train);
    const auto preds = predict_all(model.params, g_fixture.test);
    got[name] = score(preds, g_fixture.test);
    if (name == "ls_focal") g_focal_predictions = preds;
    std::printf("  %-12s %s\n", name.c_str(), describe(got[name]).c_str());
  }
  c.require(got["bce"].em < 0.10, "bce EM " + fmt("%.3f", got["bce"].em) + " >= 0.10");
  c.require(got["bce"].recall < 0.50, "bce recall " + fmt("%.3f", got["bce"].recall) + " >= 0.50");
  for (const char* k : {"ls_focal", "mlce"}) {
    c.require(got[k].f1 >= 0.90, std::string(k) + " F1 " + fmt("%.3f", got[k].f1) + " < 0.90");
    c.require(got[k].em >= 0.80, std::string(k) + " EM " + fmt("%.3f", got[k].em) + " < 0.80");
  }
  for (const char* k : {"bce", "ls_focal", "mlce", "neg_sample"})
    c.require(got["upper_bound"].f1 >= got[k].f1, std::string("upper_bound F1 below ") + k);
  c.note("bce EM " + fmt("%.3f", got["bce"].em) + " R " + fmt("%.3f", got["bce"].recall) + ", ls_focal F1 " +
         fmt("%.3f", got["ls_focal"].f1) + ", mlce F1 " + fmt("%.3f", got["mlce"].f1) + ", upper_bound F1 " +
         fmt("%.3f", got["upper_bound"].f1));
  return c;
}

Check family_recovery_check() {
  Check c;
  if (g_focal_predictions.empty()) {
    c.require(false, "ls_focal predictions unavailable");
    return c;
  }
  const auto cfg = load_config("fixture.json");
  const double model =
      version_recovery(g_focal_predictions, g_fixture, cfg.analysis.eps, cfg.analysis.min_pts, FamilyKind::Version);
  std::vector<std::vector<LabelId>> oracle;
  for (const auto& r : g_fixture.test.records) oracle.push_back(r.labels);
  const double all = version_recovery(oracle, g_fixture, cfg.analysis.eps, cfg.analysis.min_pts, std::nullopt);
  c.require(model >= 0.9, "ls_focal version-family recovery " + fmt("%.3f", model) + " < 0.9");
  c.require(all == 1.0, "oracle recovery " + fmt("%.3f", all) + " != 1");
  c.note("ls_focal version recovery " + fmt("%.3f", model) + ", oracle " + fmt("%.3f", all));
  return c;
}

// ---- 8 ----------------------------------------------------------------------

Check difficulty() {
  Check c;
  const auto cfg = load_config("fixture.json");
  std::vector<double> easy, normal;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto spec = *cfg.fixture;
    spec.seed = seed;
    auto tc = cfg.train;
    tc.seed = seed;
    for (auto mode : {Difficulty::Easy, Difficulty::Normal}) {
      const auto f = prepare_fixture(spec, seed, mode);
      const auto m = train(f.train, f.valid, cfg.encoder, cfg.loss, tc);
      const double f1 = score(predict_all(m.params, f.test), f.test).f1;
      (mode == Difficulty::Easy ? easy : normal).push_back(f1);
    }
    std::printf("  seed %llu  easy-1 F1 %.4f  normal F1 %.4f\n", static_cast<unsigned long long>(seed),
                easy.back(), normal.back());
  }
  const double e = cli::median(easy), n = cli::median(normal);
  c.require(e >= n, "median Easy-1 F1 " + fmt("%.4f", e) + " < Normal " + fmt("%.4f", n));
  c.note("median Easy-1 F1 " + fmt("%.4f", e) + " >= Normal " + fmt("%.4f", n));
  return c;
}

// ---- 9 ----------------------------------------------------------------------

Check icl_golden() {
  Check c;
  const auto train = parse_corpus(R"({"id":"t2","text":"reserve a suite downtown","labels":["hotel"]})"
                                  "\n"
                                  R"({"id":"t1","text":"book a room near the station","labels":["hotel"]})"
                                  "\n"
                                  R"({"id":"t3","text":"get me a cab to the airport","labels":["taxi"]})"
                                  "\n",
                                  Split::Train);
  const auto test = parse_corpus(R"({"id":"q1","text":"i need a taxi and a hotel","labels":["hotel","taxi"]})"
                                 "\n"
                                 R"({"id":"q2","text":"somewhere to sleep","labels":["hotel"]})"
                                 "\n",
                                 Split::Test);
  const auto golden = io::read_file(fs::path(ENTANGLE_GOLDEN_DIR) / "prompt_two_label.txt");
  c.require(build_prompt(train, train.inventory, "i need a taxi and a hotel") == golden,
            "prompt differs from the golden file");
  auto oracle = oracle_transport(train, test, train.inventory);
  const auto good = run_icl_eval(oracle, train, test, train.inventory).metrics;
  c.require(good.f1 == 1.0 && good.em == 1.0, "oracle mock gives " + describe(good));
  FunctionTransport empty([](const std::string&) { return std::string(); });
  const auto none = run_icl_eval(empty, train, test, train.inventory).metrics;
  c.require(none.recall == 0.0, "empty mock recall " + fmt("%.3f", none.recall));
  c.note("golden prompt matches; oracle F1=EM=1; empty R=0");
  return c;
}

// ---- 10 ---------------------------------------------------------------------

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "entangle");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream err;
  const int code = cli::run_cli(int(argv.size()), argv.data(), err);
  if (code) std::printf("  %s", err.str().c_str());
  return code;
}

/// Checksums of every non-manifest file under dir, keyed by relative path.
std::map<std::string, std::string> tree_checksums(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (name.rfind("manifest.", 0) == 0) continue;
    out[fs::relative(e.path(), dir).string()] = io::file_checksum(e.path());
  }
  return out;
}

Check end_to_end() {
  Check c;
  const auto cfg = (fs::path(ENTANGLE_CONFIG_DIR) / "fixture.json").string();
  const auto root = fs::temp_directory_path() / "entangle_acceptance";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> sums;
  for (const char* run : {"a", "b"}) {
    const auto d = [&](const char* sub) { return (root / run / sub).string(); };
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = cli_run({"--config", cfg, "--out-dir", d("raw"), "fixture"}) == 0 &&
              cli_run({"--config", cfg, "--out-dir", d("vcs"), "transform", "--data-dir", d("raw")}) == 0 &&
              cli_run({"--config", cfg, "--out-dir", d("model"), "train", "--data-dir", d("vcs")}) == 0 &&
              cli_run({"--config", cfg, "--out-dir", d("out"), "predict", "--model",
                       (root / run / "model" / "model.json").string(), "--input",
                       (root / run / "vcs" / "test.jsonl").string()}) == 0 &&
              cli_run({"--config", cfg, "--out-dir", d("out"), "eval", "--gold",
                       (root / run / "vcs" / "test.jsonl").string(), "--predictions",
                       (root / run / "out" / "predictions.jsonl").string()}) == 0 &&
              cli_run({"--config", cfg, "--out-dir", d("out"), "analyze", "--predictions",
                       (root / run / "out" / "predictions.jsonl").string(), "--gold",
                       (root / run / "vcs" / "test.jsonl").string(), "--registry",
                       (root / run / "vcs" / "registry.json").string()}) == 0 &&
              cli_run({"--config", cfg, "--out-dir", d("icl"), "icl-eval", "--data-dir", d("vcs"), "--oracle"}) == 0;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(ok, std::string("pipeline run ") + run + " failed");
    c.require(secs < 120.0, std::string("pipeline run ") + run + " took " + fmt("%.1f", secs) + " s");
    if (!ok) return c;
    sums.push_back(tree_checksums(root / run));
    std::printf("  run %s: %zu files, %.1f s\n", run, sums.back().size(), secs);
  }
  std::size_t differ = 0;
  for (const auto& [k, v] : sums[0]) {
    auto it = sums[1].find(k);
    if (it == sums[1].end() || it->second != v) ++differ;
  }
  c.require(sums[0].size() == sums[1].size() && differ == 0, std::to_string(differ) + " outputs differ");
  for (const char* want : {"vcs/train.jsonl", "model/model.bin", "out/metrics.json", "out/analysis.json"})
    c.require(sums[0].count(want) == 1, std::string("missing ") + want);
  c.note(std::to_string(sums[0].size()) + " outputs checksum-identical");
  fs::remove_all(root);
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Check()> run;
    double limit_s;  // 0 = no runtime bound
  };
  const std::vector<Criterion> all = {
      {1, "metric oracle equivalence", metric_oracle, 5},
      {2, "gradient correctness", gradients, 10},
      {3, "loss reduction identities", identities, 0},
      {4, "transformation invariants", transform_invariants, 5},
      {5, "stats fidelity", stats_fidelity, 0},
      {6, "core finding on the fixture", core_finding, 120},
      {7, "family recovery", family_recovery_check, 0},
      {8, "difficulty monotonicity", difficulty, 0},
      {9, "ICL golden files", icl_golden, 2},
      {10, "end-to-end determinism", end_to_end, 0},
  };
  int failed = 0;
  for (const auto& cr : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0 && secs >= cr.limit_s) {
      c.pass = false;
      c.detail += "; runtime " + fmt("%.2f", secs) + " s exceeds " + fmt("%.0f", cr.limit_s) + " s";
    }
    std::printf("%s criterion %d: %s (%s) [%.2f s]\n", c.pass ? "PASS" : "FAIL", cr.id, cr.name, c.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !c.pass;
  }
  return failed ? 1 : 0;
}
