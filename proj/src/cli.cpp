#include "tli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tli/errors.hpp"
#include "tli/report_json.hpp"
#include "tli/segmentation.hpp"
#include "tli/transfer.hpp"

namespace tli::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kGraphSuffix = ".tligraph.json";
constexpr std::string_view kTensorsSuffix = ".tlitensors";

struct ModelArgs {
  std::string graph;
  std::string tensors;
};

// Writes through a temporary sibling so a failure never leaves a partial file behind.
void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    out << text;
    if (!out.flush()) {
      out.close();
      fs::remove(tmp);
      throw Error(path.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(path.string() + ": " + ec.message());
  }
}

Model load(const ModelArgs& args, bool need_tensors) {
  std::optional<fs::path> tensors;
  if (!args.tensors.empty()) {
    tensors = args.tensors;
  } else {
    tensors = sibling_tensors(args.graph);
  }
  if (need_tensors && !tensors) {
    throw Error(args.graph + ": no tensor store given and no sibling " + std::string(kTensorsSuffix) + " found");
  }
  return load_model(args.graph, tensors);
}

std::string format_score(double v) { return fmt::format("{:.4f}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void add_model_args(CLI::App* cmd, const std::string& role, ModelArgs& args) {
  cmd->add_option(role, args.graph, role + " graph (" + std::string(kGraphSuffix) + ")")->required();
  cmd->add_option("--" + role + "-tensors", args.tensors,
                  role + " tensor store; defaults to the sibling " + std::string(kTensorsSuffix) + " file");
}

void add_matching_flags(CLI::App* cmd, TransferConfig& cfg) {
  cmd->add_option("--topk", cfg.injection.k, "teacher candidates kept per student tensor")->check(CLI::PositiveNumber);
  cmd->add_option("--min-score", cfg.min_score, "minimum path score for a candidate")->check(CLI::Range(0.0, 1.0));
}

int cmd_score(const ModelArgs& s, const ModelArgs& t, const TransferConfig& cfg, const std::string& report_path,
              std::ostream& out) {
  const Model student = load(s, false);
  const Model teacher = load(t, false);
  const MatchReport report = score_models(student, teacher, cfg);
  if (!report_path.empty()) write_text_atomic(report_path, match_report_json(report));
  out << "tli_score=" << format_score(report.tli_score) << "\n";
  return kExitOk;
}

int cmd_transfer(const ModelArgs& s, const ModelArgs& t, const TransferConfig& cfg, const std::string& out_path,
                 const std::string& report_path, std::ostream& out) {
  const Model student = load(s, true);
  const Model teacher = load(t, true);
  const TransferResult result = transfer(student, teacher, cfg);
  write_store_file(out_path, result.store);
  if (!report_path.empty()) {
    try {
      write_text_atomic(report_path, transfer_report_json(result.report));
    } catch (...) {
      fs::remove(out_path);
      throw;
    }
  }
  out << "tli_score=" << format_score(result.report.match.tli_score) << "\n";
  return kExitOk;
}

int cmd_matrix(const std::string& dir, const std::string& out_csv, const TransferConfig& cfg) {
  if (!fs::is_directory(dir)) throw Error(dir + ": not a directory");
  std::vector<fs::path> graphs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (entry.is_regular_file() && file.size() > kGraphSuffix.size() && file.ends_with(kGraphSuffix)) {
      graphs.push_back(entry.path());
    }
  }
  if (graphs.empty()) throw Error(dir + ": no " + std::string(kGraphSuffix) + " files found");
  std::sort(graphs.begin(), graphs.end(),
            [](const fs::path& a, const fs::path& b) { return model_name(a) < model_name(b); });

  std::vector<Model> models;
  std::vector<std::string> names;
  for (const auto& g : graphs) {
    try {
      models.push_back(load_model(g, sibling_tensors(g)));
    } catch (const Error& e) {
      throw Error("model " + g.filename().string() + " failed validation: " + e.what());
    }
    names.push_back(model_name(g));
  }

  std::string csv = "# directed tli_score: row = student, column = teacher\r\n";
  csv += "student";
  for (const auto& n : names) csv += "," + csv_field(n);
  csv += "\r\n";
  for (std::size_t i = 0; i < models.size(); ++i) {
    csv += csv_field(names[i]);
    for (std::size_t j = 0; j < models.size(); ++j) {
      csv += "," + format_score(score_models(models[i], models[j], cfg).tli_score);
    }
    csv += "\r\n";
  }
  write_text_atomic(out_csv, csv);
  return kExitOk;
}

int cmd_inspect(const ModelArgs& m, std::ostream& out) {
  const Model model = load(m, false);
  const auto subs = segment(model.graph);
  out << inspect_json(model.graph, subs, extract_paths(model.graph, subs));
  return kExitOk;
}

}  // namespace

std::optional<fs::path> sibling_tensors(const fs::path& graph_path) {
  const std::string file = graph_path.filename().string();
  if (!file.ends_with(kGraphSuffix)) return std::nullopt;
  fs::path candidate = graph_path.parent_path() / (model_name(graph_path) + std::string(kTensorsSuffix));
  if (fs::exists(candidate)) return candidate;
  return std::nullopt;
}

std::string model_name(const fs::path& graph_path) {
  std::string file = graph_path.filename().string();
  if (file.ends_with(kGraphSuffix)) file.resize(file.size() - kGraphSuffix.size());
  return file;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-architecture weight transfer by execution-path matching", "tli"};
  app.require_subcommand(1);

  TransferConfig cfg;
  ModelArgs student, teacher, single;
  std::string report_path, out_path, models_dir, out_csv, norm_policy = "transfer_all";

  auto* score = app.add_subcommand("score", "Print the directed similarity score of two models");
  add_model_args(score, "student", student);
  add_model_args(score, "teacher", teacher);
  add_matching_flags(score, cfg);
  score->add_option("--report", report_path, "write the full match report as JSON");

  auto* xfer = app.add_subcommand("transfer", "Inject teacher weights into the student's shapes");
  add_model_args(xfer, "student", student);
  add_model_args(xfer, "teacher", teacher);
  add_matching_flags(xfer, cfg);
  xfer->add_option("-o,--out", out_path, "output tensor store")->required();
  xfer->add_option("--lambda", cfg.injection.lambda, "crop/resize blend strength")->check(CLI::Range(0.0, 1.0));
  xfer->add_option("--temperature", cfg.injection.temperature, "softmax temperature for top-k mixing")
      ->check(CLI::PositiveNumber);
  xfer->add_option("--norm-policy", norm_policy, "transfer_all | skip_norm_params | skip_running_stats")
      ->check(CLI::IsMember({"transfer_all", "skip_norm_params", "skip_running_stats"}));
  xfer->add_option("--report", report_path, "write the transfer report as JSON");

  auto* matrix = app.add_subcommand("matrix", "Pairwise similarity CSV for every model in a directory");
  matrix->add_option("models_dir", models_dir, "directory of graph files")->required();
  matrix->add_option("out_csv", out_csv, "CSV output path")->required();
  add_matching_flags(matrix, cfg);

  auto* inspect = app.add_subcommand("inspect", "Dump submodules and execution paths as JSON");
  inspect->add_option("model", single.graph, "graph file")->required();
  inspect->add_option("--tensors", single.tensors, "tensor store; defaults to the sibling file");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();
  try {
    app.parse(std::move(argv_rev));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    cfg.norm_policy = *parse_norm_policy(norm_policy);
    if (*score) return cmd_score(student, teacher, cfg, report_path, out);
    if (*xfer) return cmd_transfer(student, teacher, cfg, out_path, report_path, out);
    if (*matrix) return cmd_matrix(models_dir, out_csv, cfg);
    if (*inspect) return cmd_inspect(single, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace tli::cli
