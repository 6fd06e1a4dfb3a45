#pragma once

#include "aggpi/harness.hpp"
#include "aggpi/intervals.hpp"
#include "aggpi/nagaev.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace aggpi::config {

using Json = nlohmann::json;

/// Parses JSON text. Syntax errors become ConfigInvalid with line and column.
Json parse(const std::string& text, const std::string& source = "<config>");
Json load(const std::filesystem::path& path);

/// Compact serialization with sorted keys; the input to config digests.
std::string canonical(const Json& j);

/// Experiment schema. An optional "preset" key names the base configuration;
/// the other keys override it. Unknown keys and wrong types are ConfigInvalid
/// errors naming the field path (e.g. "dgp.phi1").
ExperimentConfig experiment_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);
Json to_json(const DgpSpec& spec);

/// Settings of a single prediction run (the predict command).
struct PredictConfig {
    std::string data;
    std::string covariates;
    std::string future_covariates;
    bool future_mean = false;
    IntervalMethod method = IntervalMethod::QTL;
    Estimator estimator = Estimator::OLS;
    std::size_t m = 24;
    double level = 0.9;
    std::optional<double> weights_delta;
    std::optional<std::size_t> block_len;
    std::size_t boot_B = 1000;
    std::optional<double> boot_block_len;
    int cv_folds = 10;
    std::uint64_t rng_seed = 1;
};

PredictConfig predict_from_json(const Json& j);
Json to_json(const PredictConfig& cfg);

NagaevCheckConfig nagaev_from_json(const Json& j);
Json to_json(const NagaevCheckConfig& cfg);

}  // namespace aggpi::config
