#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "chaosint/runner.hpp"
#include "chaosint/version.hpp"

namespace {

// Collects --key value overrides into a JSON object; flags win over the file.
struct Overrides {
  nlohmann::json j = nlohmann::json::object();

  void num(CLI::App* cmd, const std::string& flag, const std::string& key,
           const std::string& desc) {
    auto cb = [this, key, flag](const std::string& v) {
      try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        j[key] = d;
      } catch (const std::exception&) {
        throw CLI::ValidationError("--" + flag, "expected a number, got '" + v + "'");
      }
    };
    cmd->add_option_function<std::string>("--" + flag, cb, desc);
  }
  void integer(CLI::App* cmd, const std::string& flag, const std::string& key,
               const std::string& desc) {
    auto cb = [this, key, flag](const std::string& v) {
      try {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        j[key] = i;
      } catch (const std::exception&) {
        throw CLI::ValidationError("--" + flag, "expected an integer, got '" + v + "'");
      }
    };
    cmd->add_option_function<std::string>("--" + flag, cb, desc);
  }
  void text(CLI::App* cmd, const std::string& flag, const std::string& key,
            const std::string& desc) {
    auto cb = [this, key](const std::string& v) { j[key] = v; };
    cmd->add_option_function<std::string>("--" + flag, cb, desc);
  }
  void list(CLI::App* cmd, const std::string& flag, const std::string& key,
            const std::string& desc) {
    auto cb = [this, key](const std::vector<std::string>& vs) { j[key] = vs; };
    cmd->add_option_function<std::vector<std::string>>("--" + flag, cb, desc);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaosint: verification studies for iterated integrals over discrete chaos"};
  app.set_help_flag("--help", "print help");
  app.set_version_flag("--version", chaosint::kVersion);
  app.require_subcommand(1);
  app.allow_windows_style_options(false);

  std::string config_path;
  Overrides over;

  const std::vector<std::string> commands = {"product-check", "riemann",      "ibp",
                                             "norm",          "square-decomp", "moment-bound",
                                             "qv",            "selftest"};
  const std::vector<std::string> descs = {
      "product decomposition of first-order products",
      "Riemann-sum convergence of the double integral",
      "integration-by-parts residual",
      "second-moment identity (direct vs formula)",
      "graded decomposition of the squared integral",
      "fourth-moment increment scaling",
      "quadratic-variation convergence",
      "full invariant suite"};

  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(commands[i], descs[i]);
    cmd->set_help_flag("--help", "print help");
    cmd->add_option("--config", config_path, "JSON config file; flags override file values");
    over.num(cmd, "T", "T", "time horizon");
    over.integer(cmd, "level", "level", "basis grid level");
    over.text(cmd, "model", "model", "driving-noise family tag");
    over.list(cmd, "models", "models", "family tags to run");
    over.list(cmd, "families", "families", "family tags to run");
    over.integer(cmd, "seed", "seed", "master seed");
    over.integer(cmd, "threads", "threads", "worker count (0 = CHAOSINT_THREADS or hardware)");
    over.text(cmd, "out", "out_dir", "report output directory");
    over.num(cmd, "t", "t", "integral horizon");
    over.num(cmd, "s", "s", "gap start (moment-bound)");
    over.text(cmd, "levels", "levels", "partition level range lo:hi");
    over.text(cmd, "gaps", "gaps", "gap exponent range lo:hi");
    over.integer(cmd, "pairs", "pairs", "random pair count");
    over.integer(cmd, "configs", "configs", "random config count (norm)");
    over.integer(cmd, "tensors", "tensors", "random tensor count (square-decomp)");
    over.integer(cmd, "replicates", "replicates", "Monte Carlo replicates");
    over.text(cmd, "h", "h", "step function: constant, CSV path");
    over.text(cmd, "g", "g", "step function: constant, CSV path");
    over.text(cmd, "h1", "h1", "step function: constant, CSV path");
    over.text(cmd, "h2", "h2", "step function: constant, CSV path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : chaosint::kExitConfigError;
  }

  // step-function flags may be numeric constants
  for (const char* key : {"h", "g", "h1", "h2"}) {
    if (over.j.contains(key) && over.j[key].is_string()) {
      const std::string s = over.j[key].get<std::string>();
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end && *end == '\0' && end != s.c_str()) over.j[key] = v;
    }
  }

  try {
    const std::string merged = chaosint::merge_config(config_path, over.j.dump());
    const std::string cmd = app.get_subcommands().front()->get_name();
    return chaosint::run_command(cmd, merged, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return chaosint::kExitConfigError;
  }
}
