#include "tli/segmentation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tli/errors.hpp"

namespace tli {

std::vector<Submodule> segment(const GraphDoc& g) {
  std::vector<Submodule> subs;
  Submodule current;
  for (const auto& id : g.topo_order()) {
    const OpTag tag = g.node(id).kind.tag;
    if (tag == OpTag::Input) continue;
    current.node_ids.push_back(id);
    if (is_merge(tag)) {
      current.boundary_kind = tag;
      current.index_from_head = subs.size();
      subs.push_back(std::move(current));
      current = Submodule{};
    }
  }
  if (!current.node_ids.empty()) {
    current.boundary_kind = OpTag::Output;
    current.index_from_head = subs.size();
    subs.push_back(std::move(current));
  }
  return subs;
}

namespace {

struct SubmoduleView {
  std::set<std::string> members;
  // In-submodule ancestor set of each lane root.
  std::vector<std::set<std::string>> lanes;
};

std::vector<std::string> inputs_within(const Node& n, const std::set<std::string>& members) {
  std::set<std::string> unique;
  for (const auto& in : n.inputs) {
    if (members.contains(in)) unique.insert(in);
  }
  return {unique.begin(), unique.end()};
}

SubmoduleView view_of(const GraphDoc& g, const Submodule& sub) {
  SubmoduleView v;
  v.members.insert(sub.node_ids.begin(), sub.node_ids.end());

  // Lanes follow the merge's operand order (tail submodule: sinks in document order), so
  // renaming nodes never reorders branches.
  std::vector<std::string> roots;
  if (is_merge(sub.boundary_kind)) {
    for (const auto& in : g.node(sub.node_ids.back()).inputs) {
      if (std::find(roots.begin(), roots.end(), in) == roots.end()) roots.push_back(in);
    }
  } else {
    std::set<std::string> consumed;
    for (const auto& id : sub.node_ids) {
      for (const auto& in : g.node(id).inputs) consumed.insert(in);
    }
    for (const Node& n : g.nodes()) {
      if (v.members.contains(n.id) && !consumed.contains(n.id)) roots.push_back(n.id);
    }
  }

  for (const auto& root : roots) {
    std::set<std::string> lane;
    std::vector<std::string> stack;
    if (v.members.contains(root)) stack.push_back(root);
    while (!stack.empty()) {
      std::string id = std::move(stack.back());
      stack.pop_back();
      if (!lane.insert(id).second) continue;
      for (auto& in : inputs_within(g.node(id), v.members)) stack.push_back(std::move(in));
    }
    v.lanes.push_back(std::move(lane));
  }
  return v;
}

}  // namespace

std::vector<ExecutionPath> extract_paths(const GraphDoc& g, const std::vector<Submodule>& subs) {
  std::map<std::string, std::size_t> topo_pos;
  for (std::size_t i = 0; i < g.topo_order().size(); ++i) topo_pos[g.topo_order()[i]] = i;

  const double pos_denominator = static_cast<double>(subs.size() > 1 ? subs.size() - 1 : 1);

  std::vector<ExecutionPath> paths;
  for (const Submodule& sub : subs) {
    const SubmoduleView view = view_of(g, sub);
    const std::size_t branch_count = std::max<std::size_t>(1, view.lanes.size());

    for (const auto& owner_id : sub.node_ids) {
      const Node& owner = g.node(owner_id);
      if (owner.params.empty()) continue;

      // Backward walk to the submodule entry. At fan-ins the lowest id is followed and
      // the other immediate inputs are folded into the sequence.
      std::set<std::string> on_path{owner_id};
      bool linearized = false;
      const Node* cur = &owner;
      while (true) {
        auto ins = inputs_within(*cur, view.members);
        if (ins.empty()) break;
        if (ins.size() > 1) {
          linearized = true;
          on_path.insert(ins.begin() + 1, ins.end());
        }
        on_path.insert(ins.front());
        cur = &g.node(ins.front());
      }
      std::vector<std::string> ordered(on_path.begin(), on_path.end());
      std::sort(ordered.begin(), ordered.end(),
                [&](const auto& a, const auto& b) { return topo_pos.at(a) < topo_pos.at(b); });

      std::vector<OpTag> sequence;
      std::vector<std::string> activations;
      for (const auto& id : ordered) {
        const OpKind& kind = g.node(id).kind;
        sequence.push_back(kind.tag);
        if (kind.tag == OpTag::Activation) activations.push_back(kind.activation);
      }
      std::sort(activations.begin(), activations.end());

      std::size_t branch_index = 0;
      if (!(is_merge(sub.boundary_kind) && owner_id == sub.node_ids.back())) {
        for (std::size_t lane = 0; lane < view.lanes.size(); ++lane) {
          if (view.lanes[lane].contains(owner_id)) {
            branch_index = lane;
            break;
          }
        }
      }

      std::map<ParamRole, std::size_t> role_seen;
      for (const ParamRef& p : owner.params) {
        if (!p.shape) throw ShapeError("parameter '" + p.name + "' has no shape; attach a tensor store");
        ExecutionPath path;
        path.param_name = p.name;
        path.owner = owner_id;
        path.op_sequence = sequence;
        path.activations = activations;
        path.depth = sequence.size();
        path.branch_index = branch_index;
        path.branch_count = branch_count;
        path.submodule_index = sub.index_from_head;
        path.submodule_pos = static_cast<double>(sub.index_from_head) / pos_denominator;
        path.shape = *p.shape;
        path.role = p.role;
        path.role_slot = role_seen[p.role]++;
        path.linearized = linearized;
        paths.push_back(std::move(path));
      }
    }
  }
  return paths;
}

}  // namespace tli
