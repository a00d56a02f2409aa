#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "data.hpp"

namespace haarcli {

struct Context {
    ExperimentConfig cfg;
    nlohmann::json canonical;  // to_json(cfg)
    std::filesystem::path out = "runs";
    std::size_t threads = 1;
    bool force = false;

    /// Loads the dataset on first use.
    const LoadedData& data();

private:
    std::optional<LoadedData> data_;
};

/// Runs one subcommand (learn, features, select, train, evaluate,
/// connectivity, reconstruct-demo, bool-demo), first running any missing
/// earlier stage. Returns the path of the written report.
std::filesystem::path run_command(const std::string& name, Context& ctx);

}  // namespace haarcli
