#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "diracspec/config.hpp"
#include "diracspec/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of the 2x2 Dirac system -B y' + Q y = "
               "lambda y on [0, pi] with two-point boundary conditions"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 numeric anomaly, 2 config error.");

  std::string config_path, out_dir, preset;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* opt_config =
      app.add_option("--config", config_path, "JSON run configuration file")
          ->check(CLI::ExistingFile);
  auto* opt_out =
      app.add_option("--out", out_dir, "Output directory (overrides config)");
  auto* opt_seed = app.add_option(
      "--seed", seed, "Seed for randomized probes (overrides config)");
  auto* opt_threads = app.add_option(
      "--threads", threads, "Worker thread count (overrides config)");
  auto* opt_preset = app.add_option(
      "--preset", preset,
      "Boundary preset: dirichlet, dirichlet_neumann, periodic, "
      "antiperiodic, quasiperiodic (overrides config)");

  app.add_subcommand("classify", "Classify the boundary conditions");
  app.add_subcommand("spectrum0", "Unperturbed eigenvalue series");
  app.add_subcommand("fundsys", "Fundamental system at one lambda");
  app.add_subcommand("pruefer", "Polar phase/amplitude solution at one lambda");
  app.add_subcommand("spectrum", "Localized perturbed eigenvalues");
  app.add_subcommand("green0", "Unperturbed resolvent applied to a function");
  app.add_subcommand("verify", "Asymptotic and basis diagnostics report");
  app.add_subcommand("gauge", "Trace-normalization round-trip check");
  for (auto* sc : app.get_subcommands({})) sc->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    dirac::CliOverrides ov;
    if (opt_preset->count()) ov.preset = preset;
    if (opt_seed->count()) ov.seed = seed;
    if (opt_threads->count()) ov.threads = threads;
    if (opt_out->count()) ov.out_dir = out_dir;
    const dirac::RunConfig cfg =
        dirac::load_config(opt_config->count() ? config_path : "", ov);
    const dirac::RunResult res = dirac::run_command(sub, cfg);
    if (!res.message.empty())
      std::fprintf(res.exit_code == 0 ? stdout : stderr, "%s\n",
                   res.message.c_str());
    for (const auto& a : res.artifacts) std::printf("wrote %s\n", a.c_str());
    return res.exit_code;
  } catch (const dirac::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dirac::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
