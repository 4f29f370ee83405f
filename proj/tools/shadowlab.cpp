#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "shadowlab/experiment.hpp"

namespace {

int fail(shadowlab::ErrorKind kind, const std::string& message) {
  std::cerr << shadowlab::to_json_text(shadowlab::error_json(kind, message), 0);
  return shadowlab::exit_code_for(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random projections of polytopes: sampling, estimators and symmetry strata"};
  app.set_version_flag("--version", std::string(shadowlab::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;

  for (const std::string& name : shadowlab::subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config, or a manifest.json from an earlier run")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads (default: SHADOWLAB_WORKERS, else 1)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(shadowlab::ErrorKind::ConfigError, e.what());
  }

  try {
    shadowlab::ExperimentConfig config = shadowlab::load_config(config_path);
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    const int w = shadowlab::resolve_workers(workers);
    const shadowlab::RunManifest m = shadowlab::run(config, app.get_subcommands().front()->get_name(), w);
    std::cout << m.path.string() << '\n';
    return 0;
  } catch (const shadowlab::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    std::cerr << shadowlab::to_json_text(
        shadowlab::Json{{"error", "InternalError"}, {"message", e.what()}, {"exit_code", 1}}, 0);
    return 1;
  }
}
