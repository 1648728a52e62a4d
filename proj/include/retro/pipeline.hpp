#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "retro/scenario_file.hpp"
#include "retro/scenarios.hpp"

namespace retro {

struct Tolerances {
    double normalization = 1e-10;
    double jarzynski = 1e-10;
    double crooks = 1e-9;
    double omega_consistency = 1e-10;
    double sigma = 1e-10;
    double hybrid = 1e-10;
    double quantum_consistency = 1e-9;

    /// Every tolerance set to `tol`.
    static Tolerances uniform(double tol);
};

struct IdentityCheck {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass() const { return residual <= tolerance; }
};

struct FamilyResult {
    std::string family;
    double jarzynski_average = 0.0;
    double jarzynski_expected = 1.0;
    double jarzynski_residual = 0.0;
    double max_crooks_residual = 0.0;
    double omega_consistency_residual = 0.0;
    double f_divergence = 0.0;
    std::size_t forward_atoms = 0;
    std::size_t reverse_atoms = 0;
};

struct TableDigest {
    std::string file;
    std::size_t rows = 0;
    std::string fnv1a64;
};

struct RunReport {
    std::string kind;
    std::string source;
    std::uint64_t seed = 0;
    std::vector<FamilyResult> families;
    std::vector<IdentityCheck> identities;
    std::optional<double> beta;
    std::optional<double> delta_f;
    std::optional<double> efficacy;
    std::optional<Distribution> gamma;
    std::optional<bool> gamma_unique;
    std::map<std::string, double> diagnostics;
    double dropped_forward_mass = 0.0;
    double dropped_reverse_mass = 0.0;
    std::vector<TableDigest> digests;

    bool ok() const;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    bool plot = false;
};

/// Family checks plus the residual list shared by run_pipeline and the bindings.
struct Evaluation {
    std::vector<FamilyCheck> checks;
    std::vector<FamilyResult> families;
    std::vector<IdentityCheck> identities;
};

Evaluation evaluate_run(const ScenarioRun& run, const std::vector<FFamily>& families, double merge_tol,
                        const Tolerances& tol = {});

/// Builds the scenario and writes joint.csv, measures.csv, summary.json (and
/// plot_<i>.svg per family when requested) into `out_dir`.
RunReport run_pipeline(const ScenarioFile& file, const std::filesystem::path& out_dir, const RunOptions& options = {});

nlohmann::json report_to_json(const RunReport& report);

/// Columns x, y, P_F, P_R, ratio, omega_F[family], omega_R[family] per family,
/// then the run's labels in name order; one row per support pair.
std::string joint_csv(const ScenarioRun& run, const std::vector<FamilyCheck>& checks);
/// Columns family, direction, omega, weight.
std::string measures_csv(const std::vector<FamilyCheck>& checks);

/// Reverse channel and reference distribution of a scenario.
nlohmann::json reverse_summary(const ScenarioRun& run);

struct VerifyResult {
    std::vector<IdentityCheck> checks;
    bool ok() const;
};

/// Recomputes the identities from joint.csv and measures.csv alone.
VerifyResult verify_outputs(const std::filesystem::path& dir, const Tolerances& tol = {});

std::string format_double(double v);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace retro
