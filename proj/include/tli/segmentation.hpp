#pragma once

// Phase one of a transfer: cluster a graph into submodules at merge operations and
// extract, for every parameter tensor, the execution path leading to its owner.

#include <cstddef>
#include <string>
#include <vector>

#include "tli/graph.hpp"

namespace tli {

struct Submodule {
  std::size_t index_from_head = 0;
  std::vector<std::string> node_ids;  // topo order
  /// Tag of the merge node closing the submodule, or Output for the tail.
  OpTag boundary_kind = OpTag::Output;
};

struct ExecutionPath {
  std::string param_name;
  std::string owner;
  std::vector<OpTag> op_sequence;
  /// Activation labels along op_sequence, sorted (a multiset).
  std::vector<std::string> activations;
  std::size_t depth = 0;
  /// Lane of the closing merge (by operand order) whose ancestors include the owner.
  std::size_t branch_index = 0;
  std::size_t branch_count = 1;
  std::size_t submodule_index = 0;
  double submodule_pos = 0.0;
  Shape shape;
  ParamRole role = ParamRole::Weight;
  /// Ordinal among the owner's params that share `role` (running mean vs running var).
  std::size_t role_slot = 0;
  /// True when an in-submodule fan-in was flattened by tie-break order.
  bool linearized = false;
};

/// Walks nodes in topo order, closing a submodule right after each merge node.
/// Input nodes belong to no submodule.
std::vector<Submodule> segment(const GraphDoc& g);

/// One path per parameter, ordered by owner topo position then parameter order.
/// Every parameter must carry a shape (declared or attached from a tensor store);
/// throws ShapeError otherwise.
std::vector<ExecutionPath> extract_paths(const GraphDoc& g, const std::vector<Submodule>& subs);

inline std::vector<ExecutionPath> extract_paths(const GraphDoc& g) { return extract_paths(g, segment(g)); }

}  // namespace tli
