#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "lrbms/config.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"localized reduced basis experiments"};
  std::string config_path, out_dir = "out", experiment;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "experiment configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--experiment", experiment, "experiment id override");
  CLI11_PARSE(app, argc, argv);

  try {
    lrbms::Config config = lrbms::Config::parse_file(config_path);
    if (seed_set) config.set("seed", std::to_string(seed));
    if (!experiment.empty()) config.set("experiment", experiment);
    lrbms::run_experiment(config, out_dir);
  } catch (const lrbms::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const lrbms::parameter_error& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
