#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support/toy_models.hpp"
#include "tli/errors.hpp"
#include "tli/graph.hpp"

using namespace tli;
using tli::testing::random_graph;

namespace {

const char* kChain = R"({
  "name": "tiny",
  "nodes": [
    {"id": "in", "kind": "input", "inputs": []},
    {"id": "conv", "kind": "conv", "inputs": ["in"],
     "params": [{"name": "conv.weight", "role": "weight", "shape": [4, 3, 3, 3]}],
     "attrs": {"stride": 1, "kernel": [3, 3], "momentum": 0.1}},
    {"id": "out", "kind": "output", "inputs": ["conv"]}
  ],
  "outputs": ["out"]
})";

std::string with_replaced(std::string doc, const std::string& from, const std::string& to) {
  doc.replace(doc.find(from), from.size(), to);
  return doc;
}

}  // namespace

TEST_CASE("load_graph accepts a minimal chain") {
  const GraphDoc g = load_graph(kChain);
  CHECK(g.name() == "tiny");
  CHECK(g.param_count() == 1);
  CHECK(g.topo_order() == std::vector<std::string>{"in", "conv", "out"});
  CHECK(g.param_index().at("conv.weight").node_id == "conv");
  CHECK(g.param_index().at("conv.weight").role == ParamRole::Weight);
  const auto& attrs = g.node("conv").attrs;
  CHECK(std::get<std::int64_t>(attrs.at("stride")) == 1);
  CHECK(std::get<std::vector<std::int64_t>>(attrs.at("kernel")) == std::vector<std::int64_t>{3, 3});
  CHECK(std::get<double>(attrs.at("momentum")) == doctest::Approx(0.1));
}

TEST_CASE("load_graph rejects malformed documents") {
  CHECK_THROWS_AS(load_graph(with_replaced(kChain, "[\"conv\"]", "[\"x9\"]")), DanglingRefError);
  CHECK_THROWS_AS(load_graph(with_replaced(kChain, "\"outputs\": [\"out\"]", "\"outputs\": [\"nope\"]")),
                  DanglingRefError);
  CHECK_THROWS_AS(load_graph(with_replaced(kChain, "\"kind\": \"conv\"", "\"kind\": \"Conv2dBackward\"")),
                  SchemaError);
  CHECK_THROWS_AS(load_graph(with_replaced(kChain, "\"name\": \"tiny\",", "")), SchemaError);
  CHECK_THROWS_AS(load_graph(with_replaced(kChain, "\"role\": \"weight\"", "\"role\": 3")), SchemaError);
  CHECK_THROWS_AS(load_graph(with_replaced(kChain, "\"role\": \"weight\"", "\"role\": \"gamma\"")), SchemaError);
  CHECK_THROWS_AS(load_graph("{not json"), SchemaError);
  CHECK_THROWS_AS(load_graph("[]"), SchemaError);

  try {
    load_graph(with_replaced(kChain, "\"kind\": \"conv\"", "\"kind\": 7"));
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("nodes[1].kind") != std::string::npos);
  }
}

TEST_CASE("activation label is present iff the node is an activation") {
  const std::string act = with_replaced(kChain, "\"kind\": \"output\"", "\"kind\": \"activation\"");
  CHECK_THROWS_AS(load_graph(act), SchemaError);
  CHECK_NOTHROW(load_graph(with_replaced(act, "\"kind\": \"activation\"", "\"kind\": \"activation\", \"activation\": \"relu\"")));
  CHECK_THROWS_AS(load_graph(with_replaced(kChain, "\"kind\": \"conv\"", "\"kind\": \"conv\", \"activation\": \"relu\"")),
                  SchemaError);
}

TEST_CASE("cycles and self-loops are rejected") {
  const char* cyclic = R"({"name": "c", "outputs": ["b"], "nodes": [
    {"id": "in", "kind": "input", "inputs": []},
    {"id": "a", "kind": "opaque", "inputs": ["in", "b"]},
    {"id": "b", "kind": "opaque", "inputs": ["a"]}]})";
  CHECK_THROWS_AS(load_graph(cyclic), CycleError);
  const char* self = R"({"name": "c", "outputs": ["a"], "nodes": [
    {"id": "in", "kind": "input", "inputs": []},
    {"id": "a", "kind": "opaque", "inputs": ["a"]}]})";
  CHECK_THROWS_AS(load_graph(self), CycleError);
}

TEST_CASE("structural requirements") {
  const char* no_input = R"({"name": "c", "outputs": ["a"], "nodes": [{"id": "a", "kind": "opaque", "inputs": []}]})";
  CHECK_THROWS_AS(load_graph(no_input), SchemaError);
  const char* no_outputs = R"({"name": "c", "outputs": [], "nodes": [{"id": "a", "kind": "input", "inputs": []}]})";
  CHECK_THROWS_AS(load_graph(no_outputs), SchemaError);
  const char* dup_param = R"({"name": "c", "outputs": ["b"], "nodes": [
    {"id": "in", "kind": "input", "inputs": []},
    {"id": "a", "kind": "conv", "inputs": ["in"], "params": [{"name": "w", "role": "weight"}]},
    {"id": "b", "kind": "conv", "inputs": ["a"], "params": [{"name": "w", "role": "weight"}]}]})";
  CHECK_THROWS_AS(load_graph(dup_param), SchemaError);
  const char* dup_id = R"({"name": "c", "outputs": ["a"], "nodes": [
    {"id": "a", "kind": "input", "inputs": []}, {"id": "a", "kind": "opaque", "inputs": []}]})";
  CHECK_THROWS_AS(load_graph(dup_id), SchemaError);
}

TEST_CASE("opaque-only interiors validate") {
  const char* doc = R"({"name": "o", "outputs": ["z"], "nodes": [
    {"id": "in", "kind": "input", "inputs": []},
    {"id": "a", "kind": "opaque", "inputs": ["in"]},
    {"id": "b", "kind": "opaque", "inputs": ["a"], "params": [{"name": "b.w", "role": "weight", "shape": [2]}]},
    {"id": "z", "kind": "output", "inputs": ["b"]}]})";
  CHECK(load_graph(doc).param_count() == 1);
}

TEST_CASE("topo_order breaks ties by ascending id") {
  const char* diamond = R"({"name": "d", "outputs": ["out"], "nodes": [
    {"id": "out", "kind": "output", "inputs": ["add"]},
    {"id": "add", "kind": "add", "inputs": ["B", "A"]},
    {"id": "B", "kind": "conv", "inputs": ["in"]},
    {"id": "A", "kind": "conv", "inputs": ["in"]},
    {"id": "in", "kind": "input", "inputs": []}]})";
  const GraphDoc g = load_graph(diamond);
  CHECK(topo_order(g) == std::vector<std::string>{"in", "A", "B", "add", "out"});
  CHECK(g.node("add").inputs.size() == 2);
}

TEST_CASE("topo_order is a deterministic edge-respecting permutation on random graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const GraphDoc g = random_graph(rng, 10);
    const auto order = topo_order(g);
    REQUIRE(order.size() == g.nodes().size());
    std::set<std::string> ids(order.begin(), order.end());
    CHECK(ids.size() == order.size());
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const Node& n : g.nodes()) {
      for (const auto& in : n.inputs) CHECK(pos[in] < pos[n.id]);
    }
    CHECK(topo_order(g) == order);
  }
}

TEST_CASE("serialize/load round-trip") {
  const GraphDoc g = load_graph(kChain);
  const std::string text = serialize_graph(g);
  const GraphDoc back = load_graph(text);
  CHECK(back == g);
  CHECK(serialize_graph(back) == text);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const GraphDoc r = random_graph(rng, 10);
    CHECK(load_graph(serialize_graph(r)) == r);
  }
}
