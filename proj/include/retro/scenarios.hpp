#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "retro/fluctuation.hpp"
#include "retro/prob_core.hpp"
#include "retro/quantum.hpp"

namespace retro {

/// Units: k_B = 1, temperature enters only through beta, entropies are dimensionless.
struct ThermalSpec {
    std::vector<double> energies;
    double beta = 1.0;

    /// p(x) proportional to exp(-beta E_x).
    Distribution distribution(const Alphabet& alphabet) const;
    Distribution distribution() const { return distribution(Alphabet::indexed(energies.size())); }
    /// -ln(Z) / beta.
    double free_energy() const;
};

/// Forward and reverse processes of one worked example plus its physical labels.
struct ScenarioRun {
    std::string kind;
    JointProcess forward;
    JointProcess reverse;
    RatioTable ratio;
    /// Per-pair observables aligned with `ratio.pairs`. Every run carries "sigma",
    /// the value ln r is expected to take from the physics of the scenario.
    std::map<std::string, std::vector<double>> labels;
    std::optional<double> beta;
    std::optional<double> delta_f;
    std::optional<double> efficacy;
    std::optional<Distribution> gamma;
    std::optional<bool> gamma_unique;
    std::optional<StochasticChannel> forward_channel;
    std::optional<StochasticChannel> reverse_channel;
    /// Extra scalar residuals specific to a scenario.
    std::map<std::string, double> diagnostics;
};

/// Generic Bayesian pipeline: gamma from the steady state unless given.
/// A non-unique steady state without an explicit gamma throws NonUniqueSteadyState.
ScenarioRun bayesian_scenario(const StochasticChannel& channel, const Distribution& p, const Distribution& q,
                              const std::optional<Distribution>& gamma = std::nullopt);

/// Two energy measurements around a unitary, with H_0 = diag(eps) and H_tau = diag(eta)
/// in the computational basis.
ScenarioRun tasaki_scenario(const std::vector<double>& eps, const std::vector<double>& eta, const CMatrix& u,
                            double beta);

enum class PriorKind { thermal, microcanonical };

struct DeterministicPriors {
    PriorKind kind = PriorKind::thermal;
    double beta = 1.0;
    /// Energies of the final labels; defaults to the initial ones.
    std::optional<std::vector<double>> final_energies;
    /// Microcanonical shells.
    double initial_shell = 0.0;
    double final_shell = 0.0;
    double shell_tol = 1e-9;
};

/// phi(x'|x) = delta(x', perm(x)) with thermal or microcanonical priors.
ScenarioRun deterministic_hamiltonian_scenario(const std::vector<std::size_t>& perm,
                                               const std::vector<double>& energies,
                                               const DeterministicPriors& priors);

struct HybridTriple {
    std::size_t x = 0;
    std::size_t x_final = 0;
    double delta_s = 0.0;
    double forward = 0.0;         ///< phi(x', dS | x)
    double hybrid_reverse = 0.0;  ///< phihat(x, -dS | x')
    double residual = 0.0;        ///< |phi - e^{dS} phihat|
};

struct Jarz2000Result {
    ScenarioRun run;
    std::vector<double> delta_s_values;
    std::vector<HybridTriple> triples;
    double max_residual = 0.0;
};

/// System x reservoir under a joint permutation. `perm` acts on the index
/// x * |W| + w. The reservoir starts and ends thermal; the system priors are free.
Jarz2000Result jarz2000_scenario(const std::vector<std::size_t>& perm, std::size_t system_size,
                                 const std::vector<double>& reservoir_energies, double beta, const Distribution& p,
                                 const Distribution& q, double merge_tol = kMergeTol);

/// phi(y|x) = (1 - lambda) delta_xy + lambda gamma(y).
StochasticChannel thermalization_channel(const Distribution& gamma, double lambda);

/// One deterministic work step E_pre -> E_post followed by one relaxation step.
ScenarioRun crooks_work_relaxation_scenario(const std::vector<double>& e_pre, const std::vector<double>& e_post,
                                            const StochasticChannel& relax, double beta,
                                            double tol_fix = kTolFix);

struct TwoMeasurementConfig {
    std::vector<double> eps;
    std::vector<double> eta;
    KrausChannel channel;
    /// Columns are the eigenvectors of H_0 / H_tau; identity when empty.
    CMatrix preparation_basis;
    CMatrix measurement_basis;
    double beta = 1.0;
    std::optional<Distribution> gamma;
};

/// Energy measurements around a general channel. Reports the nonequilibrium
/// potential Phi = -ln(gamma)/beta, the entropy production
/// Sigma = beta (dE - dPhi - dF) and the efficacy sum_{x,y} phi(y|x) q(y).
ScenarioRun general_two_measurement_scenario(const TwoMeasurementConfig& config);

// ---------------------------------------------------------------------------
// Random instances; every generator is a pure function of its seed.

struct RandomClassical {
    StochasticChannel channel;
    Distribution p;
    Distribution q;
};

/// Rows from normalized positive uniforms, or, with `doubly_stochastic`, a convex
/// mixture of random permutations with a strictly positive uniform component.
RandomClassical random_classical(std::size_t d, std::uint64_t seed, bool doubly_stochastic = false);

/// Random Dirichlet(1, ..., 1) distribution.
Distribution random_distribution(const Alphabet& alphabet, std::uint64_t seed);

TwoMeasurementConfig random_two_measurement(std::size_t d, std::size_t kraus_rank, std::uint64_t seed);

QuantumProcess random_quantum_process(std::size_t d, std::size_t labels, std::size_t kraus_rank, std::uint64_t seed);

struct RandomReservoir {
    std::vector<std::size_t> perm;
    std::size_t system_size = 0;
    std::vector<double> reservoir_energies;
    double beta = 1.0;
    Distribution p;
    Distribution q;
};

/// Reservoir energies on a half-integer grid so that entropy values repeat.
RandomReservoir random_reservoir(std::size_t system_size, std::size_t reservoir_size, std::uint64_t seed);

enum class RandomKind { classical_channel, doubly_stochastic_channel, quantum_process, two_measurement, reservoir };

struct RandomDims {
    std::size_t d = 2;
    std::size_t labels = 2;
    std::size_t kraus_rank = 2;
    std::size_t reservoir = 2;
};

using ScenarioInputs = std::variant<RandomClassical, QuantumProcess, TwoMeasurementConfig, RandomReservoir>;

ScenarioInputs random_scenario(RandomKind kind, const RandomDims& dims, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Checks

struct FamilyCheck {
    std::string family;
    OmegaTable omega;
    DiscreteMeasure mu_f;
    DiscreteMeasure mu_r;
    double jarzynski_average = 0.0;
    /// Normalization of the reverse process on the forward support; 1 unless
    /// the run dropped reverse mass under SupportPolicy::common.
    double jarzynski_expected = 1.0;
    double jarzynski_residual = 0.0;
    CrooksReport crooks;
    double f_divergence = 0.0;
};

FamilyCheck check_family(const ScenarioRun& run, const FFamily& family, double merge_tol = kMergeTol);

/// max |ln r - sigma| over the run's pairs.
double sigma_label_residual(const ScenarioRun& run);

/// max |r - closed form p(x) gamma(y) / (q(y) gamma(x))|, relative to r.
double ratio_closed_form_residual(const ScenarioRun& run, const Distribution& p, const Distribution& q);

}  // namespace retro
