#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qsampler/commands.hpp"

namespace {

std::optional<int> workers_from_env() {
  const char* raw = std::getenv("QSAMPLER_WORKERS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(raw, &used);
    if (used == std::string(raw).size() && n >= 1) return n;
  } catch (const std::exception&) {
  }
  throw qsampler::cli::ConfigError(std::string("QSAMPLER_WORKERS must be an integer >= 1, got '") +
                                   raw + "'");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qsampler::cli;

  CLI::App app{"Pseudo-random unitaries from Floquet propagators of the perturbed Harper model"};
  app.set_version_flag("--version", std::string(qsampler::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
  std::string format;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "RNG seed (unsigned 64-bit)");
    sub->add_option("--workers", workers, "worker threads (default: $QSAMPLER_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--format", format, "tabular output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  const char* commands[][2] = {
      {"propagator", "write a Floquet or drifting propagator, its eigenphases and metadata"},
      {"frame-potential", "estimate frame potentials of a sampler"},
      {"diagnostics", "spacing, transition-moment, IPR, operator-coefficient and Husimi data"},
      {"poincare", "classical stroboscopic section"},
      {"list-samplers", "print the built-in samplers"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    Overrides o;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--workers")) {
      o.workers = workers;
    } else {
      o.workers = workers_from_env();
    }
    if (sub->count("--out")) o.out = out;
    if (sub->count("--format")) o.format = format;
    std::optional<std::filesystem::path> path;
    if (sub->count("--config")) path = config_path;
    const auto config = load_config(path, o);
    return run_command(sub->get_name(), config, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
