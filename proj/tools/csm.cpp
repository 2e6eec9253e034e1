#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <optional>
#include <string>

#include "csm/cli.hpp"
#include "csm/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Robust Bayesian multivariate regression and graphical modelling with cellwise outliers"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string log_level = "info";
  std::string backend;
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();
  app.add_option("--backend", backend, "force the kernel backend")->check(CLI::IsMember({"scalar", "avx2"}));

  std::string config, data, design;
  auto* fit = app.add_subcommand("fit", "fit a chain to a data CSV");
  fit->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);
  fit->add_option("data", data, "observations, header y1,...,yp")->required()->check(CLI::ExistingFile);
  fit->add_option("design", design, "optional long-format design CSV (i,row_k,col_j,value)")
      ->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand("simulate", "run a replicated simulation study");
  simulate->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);

  auto* robustness = app.add_subcommand("robustness", "numerical limit checks");
  robustness->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : csm::cli::Exit::input_error;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  if (!backend.empty()) {
    try {
      csm::kernels::set_backend(backend == "avx2" ? csm::kernels::Backend::avx2 : csm::kernels::Backend::scalar);
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      return csm::cli::Exit::input_error;
    }
  }

  if (*fit)
    return csm::cli::cmd_fit(config, data, design.empty() ? std::nullopt : std::optional<std::string>(design));
  if (*simulate) return csm::cli::cmd_simulate(config);
  return csm::cli::cmd_robustness(config);
}
