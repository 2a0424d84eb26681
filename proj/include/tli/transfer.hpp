#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tli/graph.hpp"
#include "tli/injection.hpp"
#include "tli/matching.hpp"
#include "tli/tensor_store.hpp"

namespace tli {

/// A graph with every parameter shape resolved, optionally paired with its weights.
struct Model {
  GraphDoc graph;
  std::optional<TensorMap> tensors;
};

/// Attaches store shapes to the graph. Every graph parameter must resolve in the store,
/// and a declared shape must agree with the stored one (ShapeError). Without a store,
/// every parameter needs a declared shape.
Model make_model(GraphDoc graph, std::optional<TensorMap> tensors);
Model load_model(const std::filesystem::path& graph_path, const std::optional<std::filesystem::path>& tensors_path);

enum class NormPolicy { TransferAll, SkipNormParams, SkipRunningStats };

std::string_view to_string(NormPolicy p);
std::optional<NormPolicy> parse_norm_policy(std::string_view s);

struct TransferConfig {
  InjectionConfig injection;
  double min_score = 0.0;
  NormPolicy norm_policy = NormPolicy::TransferAll;
  ScoreWeights score_weights;

  void validate() const;
};

/// Scale, shift and running statistics, plus any parameter owned by a BatchNorm/LayerNorm node.
bool is_norm_param(const GraphDoc& g, const std::string& param);
bool excluded_by_policy(const GraphDoc& g, const std::string& param, NormPolicy policy);

enum class ParamAction { Transferred, SkippedByPolicy, Unmatched };

std::string_view to_string(ParamAction a);

struct ParamDecision {
  ParamAction action = ParamAction::Unmatched;
  std::vector<std::string> sources;
  std::vector<double> mix_weights;
};

struct TransferReport {
  MatchReport match;
  std::map<std::string, ParamDecision> decisions;
};

struct TransferResult {
  TensorMap store;
  TransferReport report;
};

/// Match, inject and mix: the teacher's weights re-shaped into the student's parameters.
/// Excluded and unmatched parameters keep the student's incoming values.
TransferResult transfer(const Model& student, const Model& teacher, const TransferConfig& cfg);

/// Matching only; tensors are not required.
MatchReport score_models(const Model& student, const Model& teacher, const TransferConfig& cfg);

struct TeacherChoice {
  std::size_t index = 0;
  double tli_score = 0.0;
};

/// Argmax of tli_score over the library; ties go to the lowest index.
TeacherChoice select_best_teacher(const Model& student, std::span<const Model> teachers, const TransferConfig& cfg);

}  // namespace tli
