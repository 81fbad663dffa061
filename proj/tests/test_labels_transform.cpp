#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "entangle/fixture.hpp"
#include "entangle/transform.hpp"

using namespace entangle;

namespace {

LabelId L(const char* s) { return LabelId(s); }

Record rec(std::string id, std::vector<std::string> labels, std::vector<EntitySpan> ents = {},
           std::string text = "some words here") {
  Record r;
  r.id = std::move(id);
  r.text = std::move(text);
  for (auto& l : labels) r.labels.emplace_back(l);
  r.entities = std::move(ents);
  return r;
}

Corpus corpus(std::vector<Record> rs, Split s = Split::Train) {
  Corpus c;
  c.split = s;
  c.records = std::move(rs);
  validate_corpus(c);
  return c;
}

// Three families: A versioned, B split on entity e, {C, D} composite; E plain.
Corpus micro() {
  return corpus({rec("r1", {"A"}), rec("r2", {"A"}), rec("r3", {"A"}),
                 rec("r4", {"B"}, {{"e", 0, 4, ""}}), rec("r5", {"B"}), rec("r6", {"C", "D"}),
                 rec("r7", {"C", "D"}), rec("r8", {"E"})});
}

TransformPlan micro_plan(std::uint64_t seed = 1) {
  TransformPlan p;
  p.version_targets = {{"A", 2}};
  p.entity_splits = {{"B", "e"}};
  p.composite_split = true;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(LabelGrammar, Versioned) {
  auto p = parse_label("play_music@v2");
  EXPECT_EQ(p.base, "play_music");
  EXPECT_EQ(p.kind, LabelKind::Versioned);
  EXPECT_EQ(p.version, 2);
}

TEST(LabelGrammar, SubIntents) {
  auto p = parse_label("flight#with_time");
  EXPECT_EQ(p.base, "flight");
  EXPECT_EQ(p.kind, LabelKind::SubIntentWith);
  EXPECT_EQ(p.entity, "time");
  EXPECT_EQ(parse_label("flight#without_time").kind, LabelKind::SubIntentWithout);
}

TEST(LabelGrammar, Composite) {
  auto p = parse_label("hotel&taxi");
  EXPECT_EQ(p.kind, LabelKind::Composite);
  EXPECT_EQ(p.base, "hotel&taxi");
  EXPECT_EQ(p.atoms, (std::vector<std::string>{"hotel", "taxi"}));
  EXPECT_THROW(parse_label("taxi&hotel"), ValidationError);
  EXPECT_THROW(parse_label("hotel&hotel"), ValidationError);
}

TEST(LabelGrammar, UnrecognizedDecorationIsAtomic) {
  EXPECT_EQ(parse_label("foo@bar").kind, LabelKind::Atomic);
  EXPECT_EQ(parse_label("foo@v0").kind, LabelKind::Atomic);
  EXPECT_EQ(parse_label("foo@v01").kind, LabelKind::Atomic);
  EXPECT_EQ(parse_label("foo#maybe_x").kind, LabelKind::Atomic);
  EXPECT_THROW(parse_label(""), ValidationError);
}

TEST(LabelGrammar, RoundTrip) {
  for (const char* s : {"a", "a@v1", "a@v12", "a#with_b", "a#without_b", "a&b", "a&b&c", "x_y.z"}) {
    EXPECT_EQ(serialize_label(parse_label(s)).str(), s);
  }
  EXPECT_EQ(composite_label({"taxi", "hotel", "taxi"}).str(), "hotel&taxi");
}

TEST(Registry, FromPlan) {
  TransformPlan p;
  p.version_targets = {{"A", 2}};
  p.entity_splits = {{"flight", "time"}};
  auto r = registry_from_plan(p);
  EXPECT_EQ(r.version_families.at("A"), (std::vector<LabelId>{L("A@v1"), L("A@v2")}));
  const auto& f = r.split_families.at("flight");
  EXPECT_EQ(f.with, L("flight#with_time"));
  EXPECT_EQ(f.without, L("flight#without_time"));
  EXPECT_EQ(f.coarse, L("flight"));
  p.entity_splits.push_back({"A", "x"});
  EXPECT_THROW(registry_from_plan(p), ValidationError);
}

TEST(Registry, JsonRoundTrip) {
  auto p = micro_plan();
  p.composite_targets = {{"C", "D"}};
  auto r = registry_from_plan(p);
  auto back = FamilyRegistry::from_json_obj(nlohmann::json::parse(r.to_json_obj().dump()));
  EXPECT_EQ(back, r);
}

TEST(Expand, Rules) {
  auto p = micro_plan();
  p.composite_targets = {{"hotel", "taxi"}};
  p.version_targets.push_back({"i1", 2});
  auto r = registry_from_plan(p);
  EXPECT_EQ(expand(L("i1@v1"), r), (LabelSet{L("i1@v1"), L("i1@v2")}));
  EXPECT_EQ(expand(L("i1@v1"), r), expand(L("i1@v2"), r));
  EXPECT_EQ(expand(L("hotel&taxi"), r), (LabelSet{L("hotel"), L("taxi"), L("hotel&taxi")}));
  EXPECT_EQ(expand(L("E"), r), LabelSet{L("E")});
  EXPECT_EQ(expand(L("B#with_e"), r), (LabelSet{L("B#with_e"), L("B")}));
  EXPECT_THROW(expand(L("Z@v1"), r), ValidationError);
}

TEST(Expand, ThreeAtomCompositeHasNoPairwiseParts) {
  TransformPlan p;
  p.composite_split = true;
  p.composite_targets = {{"general", "inform", "request"}};
  auto r = registry_from_plan(p);
  EXPECT_EQ(expand(L("general&inform&request"), r),
            (LabelSet{L("general"), L("inform"), L("request"), L("general&inform&request")}));
}

TEST(Expand, ContainsSelf) {
  auto p = micro_plan();
  p.composite_targets = {{"C", "D"}};
  auto r = registry_from_plan(p);
  for (const auto& l : r.labels()) EXPECT_TRUE(expand(l, r).count(l)) << l.str();
}

TEST(VersionConflict, SingleVersionIsDeterministic) {
  TransformPlan p;
  p.version_targets = {{"A", 1}};
  Rng rng(3);
  auto out = apply_version_conflict(micro(), p, rng);
  for (const auto& r : out.records)
    if (r.id <= "r3") EXPECT_EQ(r.labels, std::vector<LabelId>{L("A@v1")});
}

TEST(VersionConflict, UniformWithinThreeSigma) {
  std::vector<Record> rs;
  for (int i = 0; i < 10000; ++i) rs.push_back(rec("r" + std::to_string(i), {"A"}));
  TransformPlan p;
  p.version_targets = {{"A", 2}};
  Rng rng(2024);
  auto out = apply_version_conflict(corpus(std::move(rs)), p, rng);
  std::size_t v1 = 0;
  for (const auto& r : out.records) v1 += r.labels.front() == L("A@v1");
  EXPECT_LE(std::abs(double(v1) - 5000.0), 3 * 50.0);
  EXPECT_EQ(out.inventory, (std::vector<LabelId>{L("A@v1"), L("A@v2")}));
}

TEST(VersionConflict, ComplementUnchangedAndErrors) {
  TransformPlan p;
  p.version_targets = {{"A", 2}};
  Rng rng(1);
  auto before = micro();
  auto out = apply_version_conflict(before, p, rng);
  for (std::size_t i = 3; i < out.records.size(); ++i) EXPECT_EQ(out.records[i].labels, before.records[i].labels);
  p.version_targets = {{"missing", 2}};
  try {
    apply_version_conflict(before, p, rng);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
  auto test = before;
  test.split = Split::Test;
  EXPECT_THROW(apply_version_conflict(test, micro_plan(), rng), ValidationError);
}

TEST(EntitySplit, ApplicableSubIntent) {
  auto c = corpus({rec("f1", {"flight"}, {{"time", 0, 6, ""}}, "monday morning i would like to fly"),
                   rec("f2", {"flight"}, {}, "fly me to boston")});
  TransformPlan p;
  p.entity_splits = {{"flight", "time"}};
  std::map<std::string, int> seen;
  for (std::uint64_t s = 0; s < 400; ++s) {
    Rng rng(s);
    auto out = apply_entity_split(c, p, rng);
    EXPECT_EQ(out.records[0].gold, (std::vector<LabelId>{L("flight"), L("flight#with_time")}));
    EXPECT_EQ(out.records[1].gold, (std::vector<LabelId>{L("flight"), L("flight#without_time")}));
    ++seen[out.records[0].labels.front().str()];
    EXPECT_TRUE(out.records[1].labels.front() == L("flight") || out.records[1].labels.front() == L("flight#without_time"));
  }
  EXPECT_EQ(seen.size(), 2u);
  EXPECT_LE(std::abs(seen["flight"] - 200), 3 * 10);  // Binomial(400, 1/2)
}

TEST(CompositeSplit, ChoiceSets) {
  auto c = corpus({rec("m1", {"hotel", "taxi"}), rec("m2", {"a", "b", "c"}), rec("s1", {"hotel"})});
  TransformPlan p;
  p.composite_split = true;
  std::map<std::string, int> two, three;
  for (std::uint64_t s = 0; s < 1200; ++s) {
    Rng rng(s);
    auto out = apply_composite_split(c, p, rng);
    ++two[out.records[0].labels.front().str()];
    ++three[out.records[1].labels.front().str()];
    EXPECT_EQ(out.records[2].labels, std::vector<LabelId>{L("hotel")});
  }
  EXPECT_EQ(two.size(), 3u);
  EXPECT_TRUE(two.count("hotel&taxi"));
  EXPECT_EQ(three.size(), 4u);
  EXPECT_TRUE(three.count("a&b&c"));
}

TEST(EvalLabels, Closures) {
  auto test = corpus({rec("t1", {"A"}), rec("t2", {"C", "D"}), rec("t3", {"E"}), rec("t4", {"B"}, {{"e", 0, 4, ""}}),
                      rec("t5", {"B"})},
                     Split::Test);
  auto reg = registry_from_plan(resolve_plan(micro_plan(), micro()));
  auto out = build_eval_labels(test, reg);
  EXPECT_EQ(out.records[0].labels, (std::vector<LabelId>{L("A@v1"), L("A@v2")}));
  EXPECT_EQ(out.records[1].labels, (std::vector<LabelId>{L("C"), L("C&D"), L("D")}));
  EXPECT_EQ(out.records[2].labels, std::vector<LabelId>{L("E")});
  EXPECT_EQ(out.records[3].labels, (std::vector<LabelId>{L("B"), L("B#with_e")}));
  EXPECT_EQ(out.records[4].labels, (std::vector<LabelId>{L("B"), L("B#without_e")}));
}

TEST(Transform, PuPropertyAndConservation) {
  FixtureSpec spec;
  spec.records_per_intent = 60;
  auto fx = generate_fixture(spec);
  auto plan = resolve_plan(fixture_plan(spec, 5), fx.train);
  auto reg = registry_from_plan(plan);
  auto tr = transform_train(fx.train, plan);
  ASSERT_EQ(tr.records.size(), fx.train.records.size());
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& r = tr.records[i];
    EXPECT_EQ(r.text, fx.train.records[i].text);
    ASSERT_EQ(r.labels.size(), 1u);
    const auto closure = record_closure(fx.train.records[i], reg);
    EXPECT_TRUE(closure.count(r.labels.front()));
    EXPECT_EQ(std::vector<LabelId>(closure.begin(), closure.end()), detail::current_gold(r));
  }
  EXPECT_EQ(tr.inventory, transformed_inventory(fx.train.inventory, reg));
  EXPECT_EQ(serialize_corpus(transform_train(fx.train, plan)), serialize_corpus(tr));
}

TEST(Plan, ValidationErrors) {
  auto c = micro();
  auto p = micro_plan();
  p.entity_splits = {{"B", "nope"}};
  EXPECT_THROW(resolve_plan(p, c), ValidationError);
  p = micro_plan();
  p.version_targets.push_back({"Q", 2});
  EXPECT_THROW(resolve_plan(p, c), ValidationError);
  p = micro_plan();
  p.version_targets.push_back({"A", 2});
  EXPECT_THROW(validate_plan(p), ValidationError);
  p = micro_plan();
  p.version_targets = {{"C", 2}};
  p.composite_targets = {{"C", "D"}};
  EXPECT_THROW(validate_plan(p), ValidationError);
  p = micro_plan();
  p.version_targets = {{"A", 0}};
  EXPECT_THROW(validate_plan(p), ValidationError);
}

TEST(Plan, JsonRoundTrip) {
  auto p = micro_plan(9);
  p.composite_targets = {{"C", "D"}};
  p.difficulty = DifficultySetting{Difficulty::Easy, 1};
  auto back = plan_from_json(nlohmann::json::parse(to_json(p).dump()));
  EXPECT_EQ(back, p);
  EXPECT_THROW(plan_from_json(nlohmann::json::parse(R"({"versions":[]})")), ValidationError);
  auto short_form = plan_from_json(nlohmann::json::parse(R"({"version_targets":["A"]})"));
  EXPECT_EQ(short_form.version_targets.front().versions, 2);
}

TEST(Stats, MicroCorpusByHand) {
  auto before = micro();
  auto plan = resolve_plan(micro_plan(), before);
  auto reg = registry_from_plan(plan);
  auto after = transform_train(before, plan);
  auto s = transform_stats(before, after, reg);
  // inventory A@v1 A@v2 B B#with_e B#without_e C C&D D E
  EXPECT_EQ(s.total_labels, 9u);
  EXPECT_EQ(s.vc_n, 2u);
  EXPECT_EQ(s.mf_n, 2u);
  EXPECT_DOUBLE_EQ(s.vc_r, 37.5);
  EXPECT_DOUBLE_EQ(s.mf_r, 50.0);
}

TEST(Stats, UntransformedCorpus) {
  auto c = micro();
  auto s = transform_stats(c, c, FamilyRegistry{});
  EXPECT_EQ(s.vc_n, 0u);
  EXPECT_EQ(s.mf_n, 0u);
  EXPECT_EQ(s.total_labels, c.inventory.size());
}

TEST(Difficulty, KeepsTopFamiliesByFrequency) {
  // four version intents with distinct frequencies and two composites
  std::vector<Record> rs;
  int id = 0;
  auto add = [&](std::vector<std::string> ls, int n) {
    for (int i = 0; i < n; ++i) rs.push_back(rec("r" + std::to_string(id++), ls));
  };
  add({"v_a"}, 5);
  add({"v_b"}, 9);
  add({"v_c"}, 7);
  add({"v_d"}, 7);
  add({"x", "y"}, 2);
  add({"x", "z"}, 4);
  auto c = corpus(std::move(rs));
  TransformPlan p;
  p.version_targets = {{"v_a", 2}, {"v_b", 2}, {"v_c", 2}, {"v_d", 2}};
  p.composite_split = true;
  auto e1 = difficulty_filter(p, Difficulty::Easy, 1, c);
  ASSERT_EQ(e1.version_targets.size(), 2u);
  EXPECT_EQ(e1.version_targets[0].intent, "v_b");
  EXPECT_EQ(e1.version_targets[1].intent, "v_c");  // tie with v_d broken lexicographically
  EXPECT_EQ(e1.composite_targets, (std::vector<std::vector<std::string>>{{"x", "z"}}));
  auto reg = registry_from_plan(e1);
  EXPECT_EQ(reg.labels().size(), 4u + 3u);
  EXPECT_EQ(difficulty_filter(p, Difficulty::Normal, 1, c), p);
  EXPECT_THROW(difficulty_filter(p, Difficulty::Hard, 3, c), ValidationError);
}
