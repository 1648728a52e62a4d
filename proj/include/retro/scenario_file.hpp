#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "retro/scenarios.hpp"

namespace retro {

inline constexpr int kSchemaVersion = 1;

struct ClassicalConfig {
    StochasticChannel channel;
    Distribution p;
    Distribution q;
    std::optional<Distribution> gamma;
};

struct TasakiConfig {
    std::vector<double> eps;
    std::vector<double> eta;
    CMatrix unitary;
    double beta = 1.0;
};

struct DeterministicConfig {
    std::vector<std::size_t> perm;
    std::vector<double> energies;
    DeterministicPriors priors;
};

struct Jarz2000Config {
    std::vector<std::size_t> perm;
    std::size_t system_size = 0;
    std::vector<double> reservoir_energies;
    double beta = 1.0;
    Distribution p;
    Distribution q;
};

struct RelaxationConfig {
    std::vector<double> e_pre;
    std::vector<double> e_post;
    StochasticChannel relax;
    double beta = 1.0;
};

struct RandomConfig {
    RandomKind kind = RandomKind::classical_channel;
    RandomDims dims;
};

using ScenarioConfig = std::variant<ClassicalConfig, TasakiConfig, DeterministicConfig, Jarz2000Config,
                                    RelaxationConfig, TwoMeasurementConfig, RandomConfig>;

/// A scenario file after schema validation. `parameters` is kept as JSON because
/// seeded parts ("haar" unitaries, random channels) are only drawn once the
/// effective seed is known; see resolve_config.
struct ScenarioFile {
    int schema_version = kSchemaVersion;
    std::string kind;
    nlohmann::json parameters;
    std::vector<FFamily> f_families;
    std::uint64_t seed = 0;
    double merge_tol = kMergeTol;
    std::string description;
    std::string source;
};

/// Throws ParseError (not JSON), VersionError (schema_version) or SchemaError
/// whose message starts with the JSON path of the offending field.
ScenarioFile parse_scenario_file(const std::filesystem::path& path);
ScenarioFile parse_scenario_text(std::string_view text, const std::string& source = "<string>");

/// Typed configuration with every seeded component drawn from `seed`.
ScenarioConfig resolve_config(const ScenarioFile& file, std::uint64_t seed);

ScenarioRun build_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Names accepted in the "kind" field.
const std::vector<std::string>& scenario_kinds();

}  // namespace retro
