// Copyright 2026 The collmps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// collmps command-line front end.
//
// Exit codes: 0 success, 1 unexpected error, 2 config error, 3 guard or
// convergence failure.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "collmps/error.hpp"
#include "collmps/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

int cmd_run(const std::string& config_path) {
  const auto cfg = collmps::load_config(config_path);
  for (const auto& [path, table] : collmps::run_all(cfg)) {
    if (path.empty()) {
      table.write(std::cout);
    } else {
      table.write_file(path);
      std::cerr << "wrote " << path << '\n';
    }
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const auto cfg = collmps::load_config(config_path);
  std::cout << "ok: " << cfg.model.name << ", " << collmps::expand_sweep(cfg).size()
            << " run(s)\n";
  return 0;
}

int cmd_reproduce(const std::string& fig, const std::string& out_dir) {
  for (const auto& p : collmps::reproduce(collmps::parse_figure(fig), out_dir)) {
    std::cerr << "wrote " << p << '\n';
  }
  return 0;
}

int cmd_kernel(const std::string& config_path, std::size_t k, std::size_t m_max) {
  const auto cfg = collmps::load_config(config_path);
  collmps::kernel_norms(cfg, k, m_max).write(std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision models with matrix-product-state environments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string figure;
  std::string out_dir = ".";
  std::size_t k = 0;
  std::size_t m_max = 0;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress numerical warnings");

  auto* run = app.add_subcommand("run", "Run an experiment config and emit CSV");
  run->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);

  auto* validate = app.add_subcommand("validate", "Check a config against the schema");
  validate->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);

  auto* reproduce = app.add_subcommand("reproduce", "Write the curve data of a figure");
  reproduce->add_option("figure", figure, "fig5a, fig5b, fig6a or fig6b")
      ->required()
      ->check(CLI::IsMember({"fig5a", "fig5b", "fig6a", "fig6b"}));
  reproduce->add_option("--out", out_dir, "Output directory");

  auto* kernel = app.add_subcommand("kernel", "Memory-kernel norms ||K_km|| and ||K2_km||");
  kernel->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  kernel->add_option("--k", k, "Step index k")->required();
  kernel->add_option("--m-max", m_max, "Largest memory depth m")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  if (quiet) collmps::set_warnings_enabled(false);

  try {
    if (*run) return cmd_run(config_path);
    if (*validate) return cmd_validate(config_path);
    if (*reproduce) return cmd_reproduce(figure, out_dir);
    if (*kernel) return cmd_kernel(config_path, k, m_max);
  } catch (const collmps::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const collmps::GuardError& e) {
    std::cerr << "guard failure: " << e.what() << '\n';
    return kExitGuard;
  } catch (const collmps::InfiniteCorrelationLength& e) {
    std::cerr << "convergence failure: " << e.what() << '\n';
    return kExitGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
