#include "tli/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tli/errors.hpp"

namespace tli {

void ScoreWeights::validate() const {
  for (double v : {seq, activations, position, branch, shape}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("score weights must be finite and non-negative");
  }
  const double sum = seq + activations + position + branch + shape;
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("score weights must sum to 1");
}

std::size_t levenshtein(std::span<const OpTag> a, std::span<const OpTag> b) {
  std::vector<std::size_t> prev(b.size() + 1), row(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({prev[j] + 1, row[j - 1] + 1, substitute});
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

double multiset_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::string> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  // |A ∩ B| + |A ∪ B| = |A| + |B| for multisets under min/max counts.
  const double inter = static_cast<double>(common.size());
  const double uni = static_cast<double>(a.size() + b.size()) - inter;
  return inter / uni;
}

double shape_similarity(const ExecutionPath& s, const ExecutionPath& t) {
  if (s.role != t.role || s.role_slot != t.role_slot) return 0.0;
  const std::size_t aligned = std::min(s.shape.size(), t.shape.size());
  if (aligned == 0) return 0.0;
  double product = 1.0;
  for (std::size_t i = 1; i <= aligned; ++i) {
    const auto a = static_cast<double>(s.shape[s.shape.size() - i]);
    const auto b = static_cast<double>(t.shape[t.shape.size() - i]);
    product *= std::min(a, b) / std::max(a, b);
  }
  const double ratio = product == 1.0 ? 1.0 : std::pow(product, 1.0 / static_cast<double>(aligned));
  return s.shape.size() == t.shape.size() ? ratio : 0.5 * ratio;
}

namespace {

double branch_similarity(const ExecutionPath& s, const ExecutionPath& t) {
  if (s.branch_count == t.branch_count && s.branch_index == t.branch_index) return 1.0;
  const double ns = static_cast<double>(s.branch_index) / static_cast<double>(s.branch_count);
  const double nt = static_cast<double>(t.branch_index) / static_cast<double>(t.branch_count);
  return std::abs(ns - nt) <= 0.25 ? 0.5 : 0.0;
}

}  // namespace

PathScore score_pair(const ExecutionPath& s, const ExecutionPath& t, const ScoreWeights& w) {
  PathScore out;
  auto& c = out.components;
  const auto longest = std::max(s.depth, t.depth);
  c.seq = longest == 0 ? 1.0
                       : 1.0 - static_cast<double>(levenshtein(s.op_sequence, t.op_sequence)) /
                                   static_cast<double>(longest);
  c.activations = multiset_jaccard(s.activations, t.activations);
  c.position = 1.0 - std::abs(s.submodule_pos - t.submodule_pos);
  c.branch = branch_similarity(s, t);
  c.shape = shape_similarity(s, t);

  // Normalizing by the summed weights makes an all-ones score exactly 1 in floating point.
  const double weighted =
      w.seq * c.seq + w.activations * c.activations + w.position * c.position + w.branch * c.branch + w.shape * c.shape;
  const double weight_sum = w.seq + w.activations + w.position + w.branch + w.shape;
  out.total = std::clamp(weighted / weight_sum, 0.0, 1.0);
  return out;
}

MatchReport match(std::span<const ExecutionPath> student, std::span<const ExecutionPath> teacher, std::size_t k,
                  double min_score, const ScoreWeights& w) {
  if (student.empty()) throw EmptyModelError("student model has no parameters");
  if (teacher.empty()) throw EmptyModelError("teacher model has no parameters");
  if (k < 1) throw ConfigError("top-k must be at least 1");
  if (!(min_score >= 0.0 && min_score <= 1.0)) throw ConfigError("min_score must lie in [0, 1]");
  w.validate();

  MatchReport report;
  double weighted_best = 0.0;
  double total_elems = 0.0;
  for (const ExecutionPath& s : student) {
    std::vector<Candidate> ranked;
    ranked.reserve(teacher.size());
    for (const ExecutionPath& t : teacher) {
      PathScore score = score_pair(s, t, w);
      if (score.total >= min_score) ranked.push_back({t.param_name, score});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score.total != b.score.total) return a.score.total > b.score.total;
      return a.teacher_param < b.teacher_param;
    });
    if (ranked.size() > k) ranked.resize(k);

    const double elems = static_cast<double>(element_count(s.shape));
    total_elems += elems;
    if (ranked.empty()) {
      report.unmatched.push_back(s.param_name);
    } else {
      weighted_best += elems * ranked.front().score.total;
    }
    if (s.linearized) report.linearized.push_back(s.param_name);
    report.per_param.emplace(s.param_name, std::move(ranked));
  }
  std::sort(report.unmatched.begin(), report.unmatched.end());
  std::sort(report.linearized.begin(), report.linearized.end());
  report.tli_score = std::clamp(weighted_best / total_elems, 0.0, 1.0);
  return report;
}

}  // namespace tli
