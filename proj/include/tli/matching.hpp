#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tli/segmentation.hpp"

namespace tli {

/// Weights of the five score components. Must be non-negative and sum to 1.
struct ScoreWeights {
  double seq = 0.35;
  double activations = 0.15;
  double position = 0.20;
  double branch = 0.10;
  double shape = 0.20;

  /// Throws ConfigError when a weight is negative or the sum differs from 1 by more than 1e-9.
  void validate() const;
};

struct ScoreComponents {
  double seq = 0.0;
  double activations = 0.0;
  double position = 0.0;
  double branch = 0.0;
  double shape = 0.0;
};

struct PathScore {
  double total = 0.0;
  ScoreComponents components;
};

/// Edit distance over op tags with unit insert/delete/substitute costs.
std::size_t levenshtein(std::span<const OpTag> a, std::span<const OpTag> b);

/// Multiset Jaccard of two sorted label lists; 1 when both are empty.
double multiset_jaccard(std::span<const std::string> a, std::span<const std::string> b);

/// Geometric mean of per-dimension min/max ratios over trailing-aligned dimensions,
/// halved when ranks differ. Returns 0 when either path's role differs.
double shape_similarity(const ExecutionPath& s, const ExecutionPath& t);

/// Symmetric similarity of two paths in [0, 1]; score_pair(p, p).total == 1 exactly.
PathScore score_pair(const ExecutionPath& s, const ExecutionPath& t, const ScoreWeights& w = {});

struct Candidate {
  std::string teacher_param;
  PathScore score;
};

struct MatchReport {
  /// Student param -> candidates sorted by total descending, then teacher name ascending.
  std::map<std::string, std::vector<Candidate>> per_param;
  std::vector<std::string> unmatched;
  /// Student params whose path flattened an in-submodule fan-in.
  std::vector<std::string> linearized;
  double tli_score = 0.0;
};

/// Scores all student x teacher pairs and keeps the top-k candidates with total >= min_score.
/// tli_score is the element-count weighted mean of each student param's best score.
/// Throws EmptyModelError if either side has no parameters, ConfigError on bad k/min_score.
MatchReport match(std::span<const ExecutionPath> student, std::span<const ExecutionPath> teacher, std::size_t k,
                  double min_score, const ScoreWeights& w = {});

}  // namespace tli
