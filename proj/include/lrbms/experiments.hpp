#pragma once

#include <string>

#include "lrbms/config.hpp"

namespace lrbms {

inline constexpr const char* kVersion = "lrbms 0.1.0";

/// Runs the experiment named by the config's `experiment` key and writes its
/// CSV artifacts plus a manifest into out_dir. Throws config_error or
/// numerical_error; deterministic for a fixed config and seed.
void run_experiment(Config& config, const std::string& out_dir);

}  // namespace lrbms
