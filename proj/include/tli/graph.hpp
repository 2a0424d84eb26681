#pragma once

// Neutral computation-graph interchange representation (`.tligraph.json`).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tli/tensor.hpp"

namespace tli {

enum class OpTag {
  Conv,
  Linear,
  BatchNorm,
  LayerNorm,
  Activation,
  Add,
  Mul,
  Concat,
  Pool,
  Reshape,
  Input,
  Output,
  Opaque,
};

std::string_view to_string(OpTag tag);
/// Parses a lowercase interchange kind string; nullopt for unknown strings.
std::optional<OpTag> parse_op_tag(std::string_view s);

/// Add, Mul and Concat close a submodule.
constexpr bool is_merge(OpTag tag) {
  return tag == OpTag::Add || tag == OpTag::Mul || tag == OpTag::Concat;
}

struct OpKind {
  OpTag tag = OpTag::Opaque;
  /// Non-empty iff tag == Activation (e.g. "relu", "silu").
  std::string activation;

  friend bool operator==(const OpKind&, const OpKind&) = default;
};

enum class ParamRole { Weight, Bias, Scale, Shift, RunningStat };

std::string_view to_string(ParamRole role);
std::optional<ParamRole> parse_param_role(std::string_view s);

struct ParamRef {
  std::string name;
  ParamRole role = ParamRole::Weight;
  /// Optional declared shape. When a tensor store accompanies the graph its shape must agree.
  std::optional<Shape> shape;

  friend bool operator==(const ParamRef&, const ParamRef&) = default;
};

using AttrValue = std::variant<std::int64_t, double, std::vector<std::int64_t>>;

struct Node {
  std::string id;
  OpKind kind;
  std::vector<std::string> inputs;
  std::vector<ParamRef> params;
  std::map<std::string, AttrValue> attrs;

  friend bool operator==(const Node&, const Node&) = default;
};

struct ParamEntry {
  std::string node_id;
  ParamRole role = ParamRole::Weight;
  /// Position of this parameter among the owning node's params.
  std::size_t slot = 0;

  friend bool operator==(const ParamEntry&, const ParamEntry&) = default;
};

/// A validated acyclic computation graph. Construct through load_graph() or make_graph().
class GraphDoc {
 public:
  const std::string& name() const { return name_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::string>& outputs() const { return outputs_; }
  const std::map<std::string, ParamEntry>& param_index() const { return param_index_; }

  /// Node lookup by id; throws DanglingRefError for unknown ids.
  const Node& node(std::string_view id) const;
  bool has_node(std::string_view id) const;
  const ParamRef& param(std::string_view name) const;

  /// Deterministic topological order (Kahn's algorithm, ready ties broken by ascending id).
  const std::vector<std::string>& topo_order() const { return topo_; }

  std::size_t param_count() const { return param_index_.size(); }

  /// Replaces declared parameter shapes. Used when pairing the graph with a tensor store.
  void set_param_shape(std::string_view name, Shape shape);

  friend bool operator==(const GraphDoc& a, const GraphDoc& b) {
    return a.name_ == b.name_ && a.nodes_ == b.nodes_ && a.outputs_ == b.outputs_;
  }

 private:
  friend GraphDoc make_graph(std::string name, std::vector<Node> nodes, std::vector<std::string> outputs);

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<std::string> outputs_;
  std::map<std::string, ParamEntry> param_index_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<std::string> topo_;
};

/// Validates and builds a graph. Throws SchemaError, DanglingRefError or CycleError.
GraphDoc make_graph(std::string name, std::vector<Node> nodes, std::vector<std::string> outputs);

/// Parses interchange JSON text into a validated graph.
GraphDoc load_graph(std::string_view document);
GraphDoc load_graph_file(const std::string& path);

/// Serializes to interchange JSON. load_graph(serialize_graph(g)) == g.
std::string serialize_graph(const GraphDoc& g);

std::vector<std::string> topo_order(const GraphDoc& g);

}  // namespace tli
