#include "tli/graph.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "tli/errors.hpp"

namespace tli {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr std::array<std::pair<OpTag, std::string_view>, 13> kOpNames{{
    {OpTag::Conv, "conv"},
    {OpTag::Linear, "linear"},
    {OpTag::BatchNorm, "batchnorm"},
    {OpTag::LayerNorm, "layernorm"},
    {OpTag::Activation, "activation"},
    {OpTag::Add, "add"},
    {OpTag::Mul, "mul"},
    {OpTag::Concat, "concat"},
    {OpTag::Pool, "pool"},
    {OpTag::Reshape, "reshape"},
    {OpTag::Input, "input"},
    {OpTag::Output, "output"},
    {OpTag::Opaque, "opaque"},
}};

constexpr std::array<std::pair<ParamRole, std::string_view>, 5> kRoleNames{{
    {ParamRole::Weight, "weight"},
    {ParamRole::Bias, "bias"},
    {ParamRole::Scale, "scale"},
    {ParamRole::Shift, "shift"},
    {ParamRole::RunningStat, "running_stat"},
}};

const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + "." + key + ": expected string");
  return v.get<std::string>();
}

const Json& require_array(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_array()) throw SchemaError(where + "." + key + ": expected array");
  return v;
}

std::vector<std::string> string_list(const Json& arr, const std::string& where) {
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) {
      throw SchemaError(where + "[" + std::to_string(i) + "]: expected string");
    }
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

Shape parse_shape(const Json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + ": expected array of positive integers");
  Shape shape;
  for (const auto& d : v) {
    if (!d.is_number_integer() || d.get<std::int64_t>() <= 0) {
      throw SchemaError(where + ": expected array of positive integers");
    }
    shape.push_back(d.get<std::int64_t>());
  }
  if (shape.empty() || shape.size() > 4) throw SchemaError(where + ": rank must be 1..4");
  return shape;
}

AttrValue parse_attr(const Json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) return v.get<double>();
  if (v.is_array()) {
    std::vector<std::int64_t> ints;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw SchemaError(where + ": expected number or list of integers");
      ints.push_back(e.get<std::int64_t>());
    }
    return ints;
  }
  throw SchemaError(where + ": expected number or list of integers");
}

Node parse_node(const Json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected object");
  Node node;
  node.id = require_string(j, "id", where);
  const std::string kind = require_string(j, "kind", where);
  auto tag = parse_op_tag(kind);
  if (!tag) throw SchemaError(where + ".kind: unknown op kind '" + kind + "'");
  node.kind.tag = *tag;
  if (auto it = j.find("activation"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError(where + ".activation: expected string");
    node.kind.activation = it->get<std::string>();
  }
  if (node.kind.tag == OpTag::Activation && node.kind.activation.empty()) {
    throw SchemaError(where + ".activation: required for kind 'activation'");
  }
  if (node.kind.tag != OpTag::Activation && !node.kind.activation.empty()) {
    throw SchemaError(where + ".activation: only allowed for kind 'activation'");
  }
  node.inputs = string_list(require_array(j, "inputs", where), where + ".inputs");

  if (auto it = j.find("params"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(where + ".params: expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& p = (*it)[i];
      const std::string pw = where + ".params[" + std::to_string(i) + "]";
      if (!p.is_object()) throw SchemaError(pw + ": expected object");
      ParamRef ref;
      ref.name = require_string(p, "name", pw);
      const std::string role = require_string(p, "role", pw);
      auto parsed = parse_param_role(role);
      if (!parsed) throw SchemaError(pw + ".role: unknown role '" + role + "'");
      ref.role = *parsed;
      if (auto s = p.find("shape"); s != p.end()) ref.shape = parse_shape(*s, pw + ".shape");
      node.params.push_back(std::move(ref));
    }
  }
  if (auto it = j.find("attrs"); it != j.end()) {
    if (!it->is_object()) throw SchemaError(where + ".attrs: expected object");
    for (const auto& [key, value] : it->items()) {
      node.attrs.emplace(key, parse_attr(value, where + ".attrs." + key));
    }
  }
  return node;
}

OrderedJson attr_to_json(const AttrValue& v) {
  return std::visit([](const auto& x) { return OrderedJson(x); }, v);
}

}  // namespace

std::string_view to_string(OpTag tag) {
  for (const auto& [t, name] : kOpNames) {
    if (t == tag) return name;
  }
  return "opaque";
}

std::optional<OpTag> parse_op_tag(std::string_view s) {
  for (const auto& [t, name] : kOpNames) {
    if (name == s) return t;
  }
  return std::nullopt;
}

std::string_view to_string(ParamRole role) {
  for (const auto& [r, name] : kRoleNames) {
    if (r == role) return name;
  }
  return "weight";
}

std::optional<ParamRole> parse_param_role(std::string_view s) {
  for (const auto& [r, name] : kRoleNames) {
    if (name == s) return r;
  }
  return std::nullopt;
}

const Node& GraphDoc::node(std::string_view id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw DanglingRefError("unknown node id '" + std::string(id) + "'");
  return nodes_[it->second];
}

bool GraphDoc::has_node(std::string_view id) const { return by_id_.find(id) != by_id_.end(); }

const ParamRef& GraphDoc::param(std::string_view name) const {
  auto it = param_index_.find(std::string(name));
  if (it == param_index_.end()) {
    throw DanglingRefError("unknown parameter '" + std::string(name) + "'");
  }
  return node(it->second.node_id).params[it->second.slot];
}

void GraphDoc::set_param_shape(std::string_view name, Shape shape) {
  auto it = param_index_.find(std::string(name));
  if (it == param_index_.end()) {
    throw DanglingRefError("unknown parameter '" + std::string(name) + "'");
  }
  nodes_[by_id_.find(it->second.node_id)->second].params[it->second.slot].shape = std::move(shape);
}

GraphDoc make_graph(std::string name, std::vector<Node> nodes, std::vector<std::string> outputs) {
  GraphDoc g;
  g.name_ = std::move(name);
  g.nodes_ = std::move(nodes);
  g.outputs_ = std::move(outputs);

  bool has_input = false;
  for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
    const Node& n = g.nodes_[i];
    if (n.id.empty()) throw SchemaError("nodes[" + std::to_string(i) + "].id: must be non-empty");
    if (!g.by_id_.emplace(n.id, i).second) {
      throw SchemaError("nodes[" + std::to_string(i) + "].id: duplicate id '" + n.id + "'");
    }
    if (n.kind.tag == OpTag::Input) {
      has_input = true;
      if (!n.inputs.empty()) throw SchemaError("node '" + n.id + "': input nodes take no inputs");
      if (!n.params.empty()) throw SchemaError("node '" + n.id + "': input nodes cannot own parameters");
    }
    if ((n.kind.tag == OpTag::Activation) != !n.kind.activation.empty()) {
      throw SchemaError("node '" + n.id + "': activation label must be present iff kind is activation");
    }
  }
  if (!has_input) throw SchemaError("nodes: graph needs at least one input node");
  if (g.outputs_.empty()) throw SchemaError("outputs: graph needs at least one output reference");

  for (const Node& n : g.nodes_) {
    for (const auto& in : n.inputs) {
      if (in == n.id) throw CycleError("node '" + n.id + "' has a self-loop");
      if (!g.has_node(in)) {
        throw DanglingRefError("node '" + n.id + "' references unknown input '" + in + "'");
      }
    }
    for (std::size_t slot = 0; slot < n.params.size(); ++slot) {
      const ParamRef& p = n.params[slot];
      if (p.name.empty()) throw SchemaError("node '" + n.id + "': parameter name must be non-empty");
      if (!g.param_index_.emplace(p.name, ParamEntry{n.id, p.role, slot}).second) {
        throw SchemaError("parameter '" + p.name + "' is declared by more than one node");
      }
    }
  }
  for (const auto& out : g.outputs_) {
    if (!g.has_node(out)) throw DanglingRefError("outputs: unknown node '" + out + "'");
  }

  // Kahn's algorithm; the ready set is ordered by id so ties resolve lexicographically.
  std::map<std::string, std::size_t, std::less<>> pending;
  std::map<std::string, std::vector<std::string>, std::less<>> consumers;
  for (const Node& n : g.nodes_) {
    pending[n.id] = n.inputs.size();
    for (const auto& in : n.inputs) consumers[in].push_back(n.id);
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, count] : pending) {
    if (count == 0) ready.push(id);
  }
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    if (auto it = consumers.find(id); it != consumers.end()) {
      for (const auto& c : it->second) {
        if (--pending[c] == 0) ready.push(c);
      }
    }
    g.topo_.push_back(std::move(id));
  }
  if (g.topo_.size() != g.nodes_.size()) {
    for (const auto& [id, count] : pending) {
      if (count > 0) throw CycleError("graph has a cycle through node '" + id + "'");
    }
  }
  return g;
}

GraphDoc load_graph(std::string_view document) {
  Json doc;
  try {
    doc = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("document: expected object");
  std::string name = require_string(doc, "name", "document");
  const Json& jnodes = require_array(doc, "nodes", "document");
  std::vector<Node> nodes;
  nodes.reserve(jnodes.size());
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    nodes.push_back(parse_node(jnodes[i], "nodes[" + std::to_string(i) + "]"));
  }
  auto outputs = string_list(require_array(doc, "outputs", "document"), "outputs");
  return make_graph(std::move(name), std::move(nodes), std::move(outputs));
}

GraphDoc load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path + ": cannot open graph file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_graph(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const CycleError& e) {
    throw CycleError(path + ": " + e.what());
  } catch (const DanglingRefError& e) {
    throw DanglingRefError(path + ": " + e.what());
  }
}

std::string serialize_graph(const GraphDoc& g) {
  OrderedJson doc;
  doc["name"] = g.name();
  OrderedJson nodes = OrderedJson::array();
  for (const Node& n : g.nodes()) {
    OrderedJson jn;
    jn["id"] = n.id;
    jn["kind"] = std::string(to_string(n.kind.tag));
    if (n.kind.tag == OpTag::Activation) jn["activation"] = n.kind.activation;
    jn["inputs"] = n.inputs;
    OrderedJson params = OrderedJson::array();
    for (const ParamRef& p : n.params) {
      OrderedJson jp;
      jp["name"] = p.name;
      jp["role"] = std::string(to_string(p.role));
      if (p.shape) jp["shape"] = *p.shape;
      params.push_back(std::move(jp));
    }
    jn["params"] = std::move(params);
    OrderedJson attrs = OrderedJson::object();
    for (const auto& [key, value] : n.attrs) attrs[key] = attr_to_json(value);
    jn["attrs"] = std::move(attrs);
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  doc["outputs"] = g.outputs();
  return doc.dump(2) + "\n";
}

std::vector<std::string> topo_order(const GraphDoc& g) { return g.topo_order(); }

}  // namespace tli
