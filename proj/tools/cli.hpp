#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsear::cli {

/// Bad flag combinations found after parsing; exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Action = std::function<void()>;

void register_synth(CLI::App& app, Action& action);
void register_warp_eval(CLI::App& app, Action& action);
void register_recon_eval(CLI::App& app, Action& action);
void register_policy_eval(CLI::App& app, Action& action);

/// `dump(2)` plus a trailing newline, written atomically.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

std::vector<int> int_list_flag(const std::string& name, const std::string& text);
std::vector<double> double_list_flag(const std::string& name, const std::string& text);

/// Logs to stderr with the command prefix.
void warn(const std::string& message);

}  // namespace sparsear::cli
