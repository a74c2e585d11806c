#include <iostream>

#include "cli.hpp"
#include "sparsear/error.hpp"
#include "sparsear/report.hpp"

namespace sparsear::cli {

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

std::vector<int> int_list_flag(const std::string& name, const std::string& text) {
  try {
    return parse_int_list(text);
  } catch (const InvalidInputError& e) {
    throw UsageError(name + ": " + e.what());
  }
}

std::vector<double> double_list_flag(const std::string& name, const std::string& text) {
  try {
    return parse_double_list(text);
  } catch (const InvalidInputError& e) {
    throw UsageError(name + ": " + e.what());
  }
}

void warn(const std::string& message) { std::cerr << "sparsear: warning: " << message << "\n"; }

}  // namespace sparsear::cli

int main(int argc, char** argv) {
  using namespace sparsear::cli;
  CLI::App app{"Sparse-sensing toolkit for RGBD sessions: synthesis, warping, reconstruction "
               "and frame-selection experiments."};
  app.require_subcommand(1);
  Action action;
  register_synth(app, action);
  register_warp_eval(app, action);
  register_recon_eval(app, action);
  register_policy_eval(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    action();
  } catch (const UsageError& e) {
    std::cerr << "sparsear: usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sparsear: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
