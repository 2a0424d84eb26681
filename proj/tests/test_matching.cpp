#include <doctest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "support/toy_models.hpp"
#include "tli/errors.hpp"
#include "tli/matching.hpp"

using namespace tli;
using namespace tli::testing;

namespace {

ExecutionPath conv_path(Shape shape) {
  ExecutionPath p;
  p.param_name = "p";
  p.op_sequence = {OpTag::Conv};
  p.depth = 1;
  p.shape = std::move(shape);
  return p;
}

ExecutionPath random_path(std::mt19937_64& rng, const std::string& name) {
  const OpTag tags[] = {OpTag::Conv, OpTag::Linear, OpTag::Activation, OpTag::Pool, OpTag::BatchNorm};
  const char* labels[] = {"relu", "silu", "gelu"};
  std::uniform_int_distribution<int> pick(0, 99);
  ExecutionPath p;
  p.param_name = name;
  const int len = 1 + pick(rng) % 6;
  for (int i = 0; i < len; ++i) {
    p.op_sequence.push_back(tags[pick(rng) % 5]);
    if (p.op_sequence.back() == OpTag::Activation) p.activations.push_back(labels[pick(rng) % 3]);
  }
  std::sort(p.activations.begin(), p.activations.end());
  p.depth = p.op_sequence.size();
  p.branch_count = 1 + static_cast<std::size_t>(pick(rng) % 3);
  p.branch_index = static_cast<std::size_t>(pick(rng)) % p.branch_count;
  p.submodule_pos = static_cast<double>(pick(rng) % 5) / 4.0;
  p.shape = random_shape(rng, 1 + static_cast<std::size_t>(pick(rng) % 4), 64);
  p.role = pick(rng) % 4 == 0 ? ParamRole::Bias : ParamRole::Weight;
  return p;
}

}  // namespace

TEST_CASE("levenshtein agrees with the naive recursion") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_path(rng, "a").op_sequence;
    const auto b = random_path(rng, "b").op_sequence;
    CHECK(levenshtein(a, b) == oracle::naive_levenshtein(a, b));
  }
  const std::vector<OpTag> one{OpTag::Conv};
  const std::vector<OpTag> three{OpTag::Conv, OpTag::Activation, OpTag::Conv};
  CHECK(levenshtein(one, three) == 2);
  CHECK(levenshtein({}, three) == 3);
}

TEST_CASE("multiset jaccard") {
  const std::vector<std::string> none;
  const std::vector<std::string> rr{"relu", "relu"};
  const std::vector<std::string> rs{"relu", "silu"};
  CHECK(multiset_jaccard(none, none) == 1.0);
  CHECK(multiset_jaccard(rr, none) == 0.0);
  CHECK(multiset_jaccard(rr, rs) == doctest::Approx(1.0 / 3.0));
  CHECK(multiset_jaccard(rr, rr) == 1.0);
}

TEST_CASE("self-similarity is exactly one") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_path(rng, "p");
    const PathScore s = score_pair(p, p);
    CHECK(s.total == 1.0);
    CHECK(s.components.seq == 1.0);
    CHECK(s.components.activations == 1.0);
    CHECK(s.components.position == 1.0);
    CHECK(s.components.branch == 1.0);
    CHECK(s.components.shape == 1.0);
  }
}

TEST_CASE("shape component uses the geometric mean of dimension ratios") {
  const PathScore s = score_pair(conv_path({64, 32, 3, 3}), conv_path({32, 32, 3, 3}));
  CHECK(s.components.shape == doctest::Approx(0.8408964152537145).epsilon(1e-12));
  CHECK(s.total == doctest::Approx(0.9681792830507429).epsilon(1e-12));
}

TEST_CASE("sequence component from edit distance") {
  ExecutionPath longer = conv_path({8, 8});
  longer.op_sequence = {OpTag::Conv, OpTag::Activation, OpTag::Conv};
  longer.depth = 3;
  const PathScore s = score_pair(conv_path({8, 8}), longer);
  CHECK(s.components.seq == doctest::Approx(1.0 / 3.0));
  CHECK(s.total == doctest::Approx(0.7666666666666667).epsilon(1e-12));
}

TEST_CASE("shape component edge cases") {
  ExecutionPath w = conv_path({16, 8, 3, 3});
  ExecutionPath b = conv_path({16, 8, 3, 3});
  b.role = ParamRole::Bias;
  CHECK(score_pair(w, b).components.shape == 0.0);

  // rank mismatch: trailing-aligned (8,3,3) vs (4,3,3) -> 0.5 * (0.5)^(1/3)
  ExecutionPath low = conv_path({4, 3, 3});
  CHECK(score_pair(w, low).components.shape == doctest::Approx(0.5 * std::cbrt(0.5)));

  ExecutionPath slot1 = conv_path({16, 8, 3, 3});
  slot1.role_slot = 1;
  CHECK(score_pair(w, slot1).components.shape == 0.0);
}

TEST_CASE("branch component") {
  ExecutionPath a = conv_path({4});
  ExecutionPath b = conv_path({4});
  a.branch_count = 2;
  a.branch_index = 1;
  b.branch_count = 4;
  b.branch_index = 2;  // same normalized position
  CHECK(score_pair(a, b).components.branch == 0.5);
  b.branch_index = 0;
  CHECK(score_pair(a, b).components.branch == 0.0);
  b.branch_count = 2;
  b.branch_index = 1;
  CHECK(score_pair(a, b).components.branch == 1.0);
}

TEST_CASE("score_pair is symmetric and bounded") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_path(rng, "a");
    const auto b = random_path(rng, "b");
    const double ab = score_pair(a, b).total;
    CHECK(ab == score_pair(b, a).total);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("custom weights are validated") {
  ScoreWeights w;
  w.seq = 0.5;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w = ScoreWeights{1.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_NOTHROW(w.validate());
  ExecutionPath longer = conv_path({8});
  longer.op_sequence = {OpTag::Conv, OpTag::Pool};
  longer.depth = 2;
  CHECK(score_pair(conv_path({8}), longer, w).total == doctest::Approx(0.5));
}

TEST_CASE("match of a model against itself") {
  for (const GraphDoc& g : toy_zoo()) {
    const auto paths = extract_paths(g);
    const MatchReport r = match(paths, paths, 1, 0.0);
    CHECK(r.tli_score == 1.0);
    CHECK(r.unmatched.empty());
    for (const auto& [param, cands] : r.per_param) {
      REQUIRE(cands.size() == 1);
      CHECK(cands.front().teacher_param == param);
      CHECK(cands.front().score.total == 1.0);
    }
  }
}

TEST_CASE("structural twins score one") {
  for (const GraphDoc& g : toy_zoo()) {
    const auto a = extract_paths(g);
    const auto b = extract_paths(renamed(g, "twin_", "twin"));
    CHECK(match(a, b, 1, 0.0).tli_score == 1.0);
    CHECK(match(b, a, 1, 0.0).tli_score == 1.0);
  }
}

TEST_CASE("changing one activation lowers the score") {
  const GraphDoc g = residual_model();
  const auto student = extract_paths(g);
  const auto teacher = extract_paths(with_activation(g, "b1_act", "gelu"));
  CHECK(match(student, teacher, 1, 0.0).tli_score < 1.0);
}

TEST_CASE("match argument checks") {
  const auto paths = extract_paths(chain_model());
  CHECK_THROWS_AS(match({}, paths, 1, 0.0), EmptyModelError);
  CHECK_THROWS_AS(match(paths, {}, 1, 0.0), EmptyModelError);
  CHECK_THROWS_AS(match(paths, paths, 0, 0.0), ConfigError);
  CHECK_THROWS_AS(match(paths, paths, 1, 1.5), ConfigError);
}

TEST_CASE("threshold extremes") {
  const auto s = extract_paths(chain_model());
  const auto t = extract_paths(concat_model());
  const MatchReport r = match(s, t, 3, 1.0);
  CHECK(r.unmatched.size() == s.size());
  CHECK(r.tli_score == 0.0);
  for (const auto& [param, cands] : r.per_param) CHECK(cands.empty());
}

TEST_CASE("match equals exhaustive selection and ignores teacher order") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = extract_paths(random_graph(rng, 10, "s"));
    auto t = extract_paths(random_graph(rng, 10, "t"));
    const std::size_t k = 1 + rng() % 3;
    const double min_score = (rng() % 4) * 0.2;
    const MatchReport r = match(s, t, k, min_score);
    const auto brute = oracle::brute_force_match(s, t, k, min_score);
    CHECK(r.tli_score == brute.tli_score);
    CHECK(r.unmatched == brute.unmatched);
    for (const auto& [param, expected] : brute.ranked) {
      const auto& got = r.per_param.at(param);
      REQUIRE(got.size() == expected.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].teacher_param == expected[i].first);
        CHECK(got[i].score.total == expected[i].second);
      }
    }
    std::shuffle(t.begin(), t.end(), rng);
    CHECK(match(s, t, k, min_score).tli_score == r.tli_score);
  }
}
