#include "tli/transfer.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "tli/errors.hpp"
#include "tli/segmentation.hpp"

namespace tli {

Model make_model(GraphDoc graph, std::optional<TensorMap> tensors) {
  for (const auto& [name, entry] : graph.param_index()) {
    const ParamRef& ref = graph.param(name);
    if (tensors) {
      auto it = tensors->find(name);
      if (it == tensors->end()) {
        throw DanglingRefError("parameter '" + name + "' of graph '" + graph.name() + "' is missing from the tensor store");
      }
      if (ref.shape && *ref.shape != it->second.shape) {
        throw ShapeError("parameter '" + name + "': graph declares shape " + shape_to_string(*ref.shape) +
                         " but the store holds " + shape_to_string(it->second.shape));
      }
      graph.set_param_shape(name, it->second.shape);
    } else if (!ref.shape) {
      throw ShapeError("parameter '" + name + "' of graph '" + graph.name() +
                       "' has no declared shape and no tensor store was supplied");
    }
  }
  return Model{std::move(graph), std::move(tensors)};
}

Model load_model(const std::filesystem::path& graph_path, const std::optional<std::filesystem::path>& tensors_path) {
  GraphDoc g = load_graph_file(graph_path.string());
  std::optional<TensorMap> tensors;
  if (tensors_path) tensors = read_store_file(*tensors_path);
  return make_model(std::move(g), std::move(tensors));
}

namespace {

constexpr std::array<std::pair<NormPolicy, std::string_view>, 3> kPolicyNames{{
    {NormPolicy::TransferAll, "transfer_all"},
    {NormPolicy::SkipNormParams, "skip_norm_params"},
    {NormPolicy::SkipRunningStats, "skip_running_stats"},
}};

Tensor inject_candidate(const Tensor& teacher, const Shape& student_shape, double lambda) {
  const std::size_t rank = std::max(teacher.shape.size(), student_shape.size());
  Tensor aligned{align_rank(teacher.shape, rank), teacher.data};
  Tensor injected = combo_injection(aligned, align_rank(student_shape, rank), lambda);
  injected.shape = student_shape;
  return injected;
}

}  // namespace

std::string_view to_string(NormPolicy p) {
  for (const auto& [policy, name] : kPolicyNames) {
    if (policy == p) return name;
  }
  return "transfer_all";
}

std::optional<NormPolicy> parse_norm_policy(std::string_view s) {
  for (const auto& [policy, name] : kPolicyNames) {
    if (name == s) return policy;
  }
  return std::nullopt;
}

std::string_view to_string(ParamAction a) {
  switch (a) {
    case ParamAction::Transferred:
      return "transferred";
    case ParamAction::SkippedByPolicy:
      return "skipped_by_policy";
    case ParamAction::Unmatched:
      return "unmatched";
  }
  return "unmatched";
}

void TransferConfig::validate() const {
  injection.validate();
  if (!(min_score >= 0.0 && min_score <= 1.0)) throw ConfigError("min_score must lie in [0, 1]");
  score_weights.validate();
}

bool is_norm_param(const GraphDoc& g, const std::string& param) {
  const ParamEntry& entry = g.param_index().at(param);
  switch (entry.role) {
    case ParamRole::Scale:
    case ParamRole::Shift:
    case ParamRole::RunningStat:
      return true;
    default:
      break;
  }
  const OpTag owner = g.node(entry.node_id).kind.tag;
  return owner == OpTag::BatchNorm || owner == OpTag::LayerNorm;
}

bool excluded_by_policy(const GraphDoc& g, const std::string& param, NormPolicy policy) {
  switch (policy) {
    case NormPolicy::TransferAll:
      return false;
    case NormPolicy::SkipNormParams:
      return is_norm_param(g, param);
    case NormPolicy::SkipRunningStats:
      return g.param_index().at(param).role == ParamRole::RunningStat;
  }
  return false;
}

MatchReport score_models(const Model& student, const Model& teacher, const TransferConfig& cfg) {
  cfg.validate();
  const auto student_paths = extract_paths(student.graph);
  const auto teacher_paths = extract_paths(teacher.graph);
  return match(student_paths, teacher_paths, cfg.injection.k, cfg.min_score, cfg.score_weights);
}

TransferResult transfer(const Model& student, const Model& teacher, const TransferConfig& cfg) {
  if (!student.tensors) throw ConfigError("transfer needs the student's tensor store");
  if (!teacher.tensors) throw ConfigError("transfer needs the teacher's tensor store");

  TransferResult result{*student.tensors, {score_models(student, teacher, cfg), {}}};
  // A zero shape component means the parameter roles differ; such candidates are never injected.
  const auto role_compatible = [](const Candidate& c) { return c.score.components.shape > 0.0; };
  for (const auto& [param, candidates] : result.report.match.per_param) {
    ParamDecision decision;
    if (excluded_by_policy(student.graph, param, cfg.norm_policy)) {
      decision.action = ParamAction::SkippedByPolicy;
    } else if (std::none_of(candidates.begin(), candidates.end(), role_compatible)) {
      decision.action = ParamAction::Unmatched;
    } else {
      Tensor& target = result.store.at(param);
      std::vector<WeightedCandidate> injected;
      injected.reserve(candidates.size());
      for (const Candidate& c : candidates) {
        if (!role_compatible(c)) continue;
        auto it = teacher.tensors->find(c.teacher_param);
        if (it == teacher.tensors->end()) {
          throw ShapeError("teacher parameter '" + c.teacher_param + "' is missing from the teacher store");
        }
        injected.push_back({inject_candidate(it->second, target.shape, cfg.injection.lambda), c.score.total});
        decision.sources.push_back(c.teacher_param);
      }
      MixResult mixed = softmax_mix(injected, cfg.injection.temperature);
      if (mixed.tensor.shape != target.shape) {
        throw ShapeError("injected tensor for '" + param + "' has shape " + shape_to_string(mixed.tensor.shape));
      }
      target = std::move(mixed.tensor);
      decision.mix_weights = std::move(mixed.weights);
      decision.action = ParamAction::Transferred;
    }
    result.report.decisions.emplace(param, std::move(decision));
  }
  return result;
}

TeacherChoice select_best_teacher(const Model& student, std::span<const Model> teachers, const TransferConfig& cfg) {
  if (teachers.empty()) throw EmptyModelError("teacher library is empty");
  TeacherChoice best{0, -1.0};
  for (std::size_t i = 0; i < teachers.size(); ++i) {
    const double s = score_models(student, teachers[i], cfg).tli_score;
    if (s > best.tli_score) best = {i, s};
  }
  return best;
}

}  // namespace tli
