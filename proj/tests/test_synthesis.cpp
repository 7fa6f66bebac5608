#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "cotc/dataset_io.hpp"
#include "cotc/errors.hpp"
#include "cotc/mocks.hpp"
#include "cotc/synthesis.hpp"
#include "test_support.hpp"

using namespace cotc;

namespace {

// Scripted generator whose responses differ per seed so trajectories are
// distinguishable.
std::unique_ptr<Endpoint> make_generator(const std::string& id) {
  std::vector<ScriptRule> rules;
  for (int seed = 0; seed < 4; ++seed) {
    ScriptRule rule;
    rule.seed = seed;
    rule.text = id + " reasoning variant " + std::to_string(seed) + " ends here";
    rules.push_back(rule);
  }
  return make_scripted_endpoint(id, rules);
}

std::vector<Sample> make_samples(int n) {
  std::vector<Sample> samples;
  for (int i = 0; i < n; ++i) {
    Sample s = test::make_sample("s" + std::to_string(i));
    s.question = "Question number " + std::to_string(i);
    samples.push_back(s);
  }
  return samples;
}

}  // namespace

TEST_CASE("synthesis produces N = M * K trajectories in model-major order") {
  Gateway gw;
  gw.register_endpoint(make_generator("gen-a"));
  gw.register_endpoint(make_generator("gen-b"));
  gw.register_endpoint(make_generator("gen-c"));

  SynthesisPlan plan;
  plan.generator_endpoints = {"gen-a", "gen-b", "gen-c"};
  plan.samples_per_model = 2;

  auto set = synthesize_trajectories(test::make_sample(), plan, gw);
  REQUIRE(set.trajectories.size() == 6);
  CHECK(set.complete());
  CHECK(set.m_models == 3);
  CHECK(set.k_samples == 2);

  const char* expected_models[] = {"gen-a", "gen-a", "gen-b", "gen-b", "gen-c", "gen-c"};
  int expected_seeds[] = {0, 1, 0, 1, 0, 1};
  for (int i = 0; i < 6; ++i) {
    CHECK(set.trajectories[i].model_id == expected_models[i]);
    CHECK(set.trajectories[i].seed == expected_seeds[i]);
    CHECK(set.trajectories[i].length_tokens == count_tokens(set.trajectories[i].text));
    CHECK(set.trajectories[i].length_tokens > 0);
  }
}

TEST_CASE("a minimal one-model one-sample plan works") {
  Gateway gw;
  gw.register_endpoint(make_generator("solo"));
  SynthesisPlan plan;
  plan.generator_endpoints = {"solo"};
  plan.samples_per_model = 1;
  auto set = synthesize_trajectories(test::make_sample(), plan, gw);
  CHECK(set.trajectories.size() == 1);
  CHECK(set.complete());
}

TEST_CASE("a hard-down generator yields a flagged partial set") {
  Gateway gw;
  gw.register_endpoint(make_generator("gen-a"));
  gw.register_endpoint(make_generator("gen-b"));
  gw.register_endpoint(make_down_endpoint("gen-dead"));

  SynthesisPlan plan;
  plan.generator_endpoints = {"gen-a", "gen-b", "gen-dead"};
  plan.samples_per_model = 2;

  try {
    synthesize_trajectories(test::make_sample(), plan, gw);
    FAIL("expected SynthesisIncomplete");
  } catch (const SynthesisIncomplete& e) {
    CHECK(e.obtained == 4);
    CHECK(e.expected == 6);
    CHECK(e.sample_id == "s1");
    CHECK(e.partial.trajectories.size() == 4);
    CHECK_FALSE(e.partial.complete());
  }
}

TEST_CASE("split_dataset honors sizes, disjointness and determinism") {
  auto samples = make_samples(10);

  auto split = split_dataset(samples, {5, 5}, 1234);
  CHECK(split.train.size() == 5);
  CHECK(split.com.size() == 5);

  std::set<std::string> seen;
  for (const auto& s : split.train) seen.insert(s.id);
  for (const auto& s : split.com) seen.insert(s.id);
  CHECK(seen.size() == 10);

  auto again = split_dataset(samples, {5, 5}, 1234);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(split.train[i].id == again.train[i].id);
    CHECK(split.com[i].id == again.com[i].id);
  }

  auto other_seed = split_dataset(samples, {5, 5}, 99);
  bool same_membership = true;
  std::set<std::string> train_a, train_b;
  for (const auto& s : split.train) train_a.insert(s.id);
  for (const auto& s : other_seed.train) train_b.insert(s.id);
  same_membership = train_a == train_b;
  CHECK_FALSE(same_membership);  // 1 in C(10,5) odds of a false alarm, fixed seeds
}

TEST_CASE("split_dataset reproduces the Table-5 shape") {
  auto samples = make_samples(9000);
  auto split = split_dataset(samples, {3000, 6000}, 7);
  CHECK(split.train.size() == 3000);
  CHECK(split.com.size() == 6000);
}

TEST_CASE("split size mismatch is rejected") {
  auto samples = make_samples(10);
  CHECK_THROWS_AS(split_dataset(samples, {4, 5}, 0), SizeMismatch);
  CHECK_THROWS_AS(split_dataset(samples, {11, -1}, 0), SizeMismatch);
}

TEST_CASE("trajectory files round-trip through jsonl") {
  Gateway gw;
  gw.register_endpoint(make_generator("gen-a"));
  gw.register_endpoint(make_generator("gen-b"));
  SynthesisPlan plan;
  plan.generator_endpoints = {"gen-a", "gen-b"};
  plan.samples_per_model = 2;

  std::vector<TrajectorySet> sets;
  for (const auto& sample : make_samples(3)) {
    sets.push_back(synthesize_trajectories(sample, plan, gw));
  }

  test::TempDir dir("traj");
  write_trajectories(sets, dir / "trajectories.jsonl");

  std::string raw = read_text_file(dir / "trajectories.jsonl");
  for (const char* field : {"\"sample_id\"", "\"model_id\"", "\"seed\"", "\"text\"",
                            "\"length_tokens\""}) {
    CHECK(raw.find(field) != std::string::npos);
  }

  auto loaded = read_trajectories(dir / "trajectories.jsonl");
  REQUIRE(loaded.size() == 3);
  for (const auto& set : sets) {
    const auto& got = loaded.at(set.sample_id);
    REQUIRE(got.trajectories.size() == set.trajectories.size());
    CHECK(got.m_models == set.m_models);
    CHECK(got.k_samples == set.k_samples);
    for (std::size_t i = 0; i < set.trajectories.size(); ++i) {
      CHECK(got.trajectories[i].model_id == set.trajectories[i].model_id);
      CHECK(got.trajectories[i].seed == set.trajectories[i].seed);
      CHECK(got.trajectories[i].text == set.trajectories[i].text);
      CHECK(got.trajectories[i].length_tokens == set.trajectories[i].length_tokens);
    }
  }
}

TEST_CASE("sample jsonl uses the exact field names") {
  test::TempDir dir("samples");
  auto samples = make_samples(2);
  samples[0].image_ref.reset();  // text-only degenerate mode
  write_samples(samples, dir / "samples.jsonl");

  std::string raw = read_text_file(dir / "samples.jsonl");
  CHECK(raw.find("\"id\"") != std::string::npos);
  CHECK(raw.find("\"question\"") != std::string::npos);
  CHECK(raw.find("\"image_ref\"") != std::string::npos);
  CHECK(raw.find("\"answer\"") != std::string::npos);
  CHECK(raw.find("\"source\"") != std::string::npos);

  auto loaded = read_samples(dir / "samples.jsonl");
  REQUIRE(loaded.size() == 2);
  CHECK_FALSE(loaded[0].image_ref.has_value());
  CHECK(loaded[1].image_ref.has_value());
  CHECK(loaded[0].source == Source::Geo170k);
}
