#include "tli/report_json.hpp"

#include <json.hpp>

namespace tli {

namespace {

using Json = nlohmann::ordered_json;

Json score_json(const PathScore& s) {
  return Json{{"total", s.total},
              {"components",
               {{"seq", s.components.seq},
                {"activations", s.components.activations},
                {"position", s.components.position},
                {"branch", s.components.branch},
                {"shape", s.components.shape}}}};
}

Json match_json(const MatchReport& report) {
  Json doc;
  doc["tli_score"] = report.tli_score;
  Json per_param = Json::object();
  for (const auto& [param, candidates] : report.per_param) {
    Json list = Json::array();
    for (const Candidate& c : candidates) {
      Json entry = score_json(c.score);
      entry["teacher"] = c.teacher_param;
      list.push_back(std::move(entry));
    }
    per_param[param] = std::move(list);
  }
  doc["per_param"] = std::move(per_param);
  doc["unmatched"] = report.unmatched;
  doc["linearized"] = report.linearized;
  return doc;
}

std::vector<std::string> tag_names(const std::vector<OpTag>& tags) {
  std::vector<std::string> out;
  for (OpTag t : tags) out.emplace_back(to_string(t));
  return out;
}

}  // namespace

std::string match_report_json(const MatchReport& report) { return match_json(report).dump(2) + "\n"; }

std::string transfer_report_json(const TransferReport& report) {
  Json doc = match_json(report.match);
  Json decisions = Json::object();
  for (const auto& [param, d] : report.decisions) {
    decisions[param] = {{"action", std::string(to_string(d.action))}, {"sources", d.sources}, {"weights", d.mix_weights}};
  }
  doc["decisions"] = std::move(decisions);
  return doc.dump(2) + "\n";
}

std::string inspect_json(const GraphDoc& g, const std::vector<Submodule>& subs, const std::vector<ExecutionPath>& paths) {
  Json doc;
  doc["name"] = g.name();
  Json jsubs = Json::array();
  for (const Submodule& s : subs) {
    jsubs.push_back({{"index", s.index_from_head}, {"boundary", std::string(to_string(s.boundary_kind))}, {"nodes", s.node_ids}});
  }
  doc["submodules"] = std::move(jsubs);
  Json jpaths = Json::array();
  for (const ExecutionPath& p : paths) {
    jpaths.push_back({{"param", p.param_name},
                      {"owner", p.owner},
                      {"op_sequence", tag_names(p.op_sequence)},
                      {"activations", p.activations},
                      {"depth", p.depth},
                      {"branch_index", p.branch_index},
                      {"branch_count", p.branch_count},
                      {"submodule_index", p.submodule_index},
                      {"submodule_pos", p.submodule_pos},
                      {"shape", p.shape},
                      {"role", std::string(to_string(p.role))},
                      {"role_slot", p.role_slot},
                      {"linearized", p.linearized}});
  }
  doc["paths"] = std::move(jpaths);
  return doc.dump(2) + "\n";
}

}  // namespace tli
