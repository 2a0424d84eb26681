#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tli::cli {

/// Exit codes: 0 on success, 2 on any usage, validation or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 2;

/// Runs the `tli` command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `<dir>/<stem>.tlitensors` for `<dir>/<stem>.tligraph.json`, if that file exists.
std::optional<std::filesystem::path> sibling_tensors(const std::filesystem::path& graph_path);

/// Model name of a graph file: the file name without the `.tligraph.json` suffix.
std::string model_name(const std::filesystem::path& graph_path);

}  // namespace tli::cli
