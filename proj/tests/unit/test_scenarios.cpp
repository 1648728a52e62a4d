#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "retro/scenarios.hpp"

using namespace retro;

namespace {

template <typename Fn>
ErrorCode code_of(Fn fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidArgument;
}

CMatrix rotation(double theta) {
    CMatrix u(2, 2);
    u << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return u;
}

// sum over support pairs of P_F e^{-sigma}, straight from the label column.
double exp_minus_sigma(const ScenarioRun& run) {
    const auto pf = joint_mass_on(run.forward, run.ratio);
    const auto& sigma = run.labels.at("sigma");
    double s = 0.0;
    for (std::size_t i = 0; i < pf.size(); ++i) s += pf[i] * std::exp(-sigma[i]);
    return s;
}

double omega_label_gap(const ScenarioRun& run) {
    const OmegaTable om = omega_variables(run.ratio, FFamily::log(1.0));
    const auto& sigma = run.labels.at("sigma");
    double worst = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) worst = std::max(worst, std::abs(om.forward.values[i] - sigma[i]));
    return worst;
}

}  // namespace

TEST(Thermal, DistributionAndFreeEnergy) {
    const ThermalSpec t{{0.0, 1.0, 3.0}, 0.7};
    const auto expect = oracle::thermal(t.energies, t.beta);
    const Distribution d = t.distribution();
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d[i], expect[i], 1e-15);
    EXPECT_NEAR(t.free_energy(), oracle::free_energy(t.energies, t.beta), 1e-14);
}

TEST(Thermal, LargeEnergiesStayFinite) {
    const ThermalSpec t{{1000.0, 1001.0}, 5.0};
    EXPECT_NEAR(t.distribution()[0], 1.0 / (1.0 + std::exp(-5.0)), 1e-15);
    EXPECT_TRUE(std::isfinite(t.free_energy()));
}

TEST(Tasaki, NoDrivingMeansNoWork) {
    const ScenarioRun run = tasaki_scenario({0.0, 0.5, 1.2}, {0.0, 0.5, 1.2}, CMatrix::Identity(3, 3), 1.3);
    for (double r : run.ratio.values) EXPECT_NEAR(r, 1.0, 1e-15);
    const FamilyCheck c = check_family(run, FFamily::log(1.0));
    ASSERT_EQ(c.mu_f.size(), 1u);
    EXPECT_NEAR(c.mu_f.atoms()[0].value, 0.0, 1e-15);
}

TEST(Tasaki, QubitRotationFourAtomWorkMeasure) {
    const double theta = 0.6;
    const double beta = 1.0;
    const std::vector<double> eps = {0.0, 1.0};
    const std::vector<double> eta = {0.0, 2.0};
    const ScenarioRun run = tasaki_scenario(eps, eta, rotation(theta), beta);

    // Hand enumeration: phi(y|x) = |U_yx|^2, W = eta_y - eps_x.
    const auto p = oracle::thermal(eps, beta);
    const double c2 = std::pow(std::cos(theta), 2);
    const double s2 = std::pow(std::sin(theta), 2);
    const std::map<double, double> work = {{0.0, p[0] * c2}, {2.0, p[0] * s2}, {-1.0, p[1] * s2}, {1.0, p[1] * c2}};

    ASSERT_EQ(run.ratio.size(), 4u);
    const auto& w = run.labels.at("W");
    const auto pf = joint_mass_on(run.forward, run.ratio);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(pf[i], work.at(w[i]), 1e-15);

    const double df = oracle::free_energy(eta, beta) - oracle::free_energy(eps, beta);
    EXPECT_NEAR(*run.delta_f, df, 1e-14);
    EXPECT_LT(omega_label_gap(run), 1e-12);

    const FamilyCheck c = check_family(run, FFamily::log(1.0));
    EXPECT_EQ(c.mu_f.size(), 4u);
    EXPECT_LT(c.crooks.max_residual, 1e-10);
    EXPECT_NEAR(c.jarzynski_average, 1.0, 1e-12);
}

TEST(Tasaki, InducedChannelIsDoublyStochasticAndSelfTransposeReversed) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const ScenarioRun run = tasaki_scenario({0, 1, 2}, {0.5, 1, 3}, haar_unitary(3, s), 0.8);
        const Eigen::MatrixXd& phi = run.forward_channel->matrix();
        EXPECT_LT((phi.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
        EXPECT_LT((run.reverse_channel->matrix() - phi.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NEAR(exp_minus_sigma(run), 1.0, 1e-12);
    }
}

TEST(Tasaki, DimensionMismatch) {
    EXPECT_EQ(code_of([] { tasaki_scenario({0, 1}, {0, 1, 2}, CMatrix::Identity(2, 2), 1.0); }),
              ErrorCode::DimensionMismatch);
}

TEST(Deterministic, IdentityPermutationThermalIsReversible) {
    DeterministicPriors pr;
    pr.beta = 2.0;
    const ScenarioRun run = deterministic_hamiltonian_scenario({0, 1, 2}, {0.0, 0.3, 1.0}, pr);
    for (double r : run.ratio.values) EXPECT_NEAR(r, 1.0, 1e-15);
}

TEST(Deterministic, TwoCycleThermalRatios) {
    const double eps = 0.8;
    const double beta = 1.5;
    DeterministicPriors pr;
    pr.beta = beta;
    const ScenarioRun run = deterministic_hamiltonian_scenario({1, 0}, {0.0, eps}, pr);
    ASSERT_EQ(run.ratio.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& pair = run.ratio.pairs[i];
        // p(x) / q(x') with both priors thermal for the same Hamiltonian.
        const double expect = pair.x == 0 ? std::exp(beta * eps) : std::exp(-beta * eps);
        EXPECT_NEAR(run.ratio.values[i] / expect, 1.0, 1e-14);
    }
    EXPECT_LT(omega_label_gap(run), 1e-12);
}

TEST(Deterministic, MicrocanonicalShellRatioIsExactlyTwo) {
    DeterministicPriors pr;
    pr.kind = PriorKind::microcanonical;
    pr.final_energies = std::vector<double>{1, 1, 0, 0, 0, 0};
    pr.initial_shell = 0.0;
    pr.final_shell = 0.0;
    const ScenarioRun run = deterministic_hamiltonian_scenario({2, 3, 0, 1, 4, 5}, {0, 0, 1, 1, 1, 1}, pr);
    ASSERT_EQ(run.ratio.size(), 2u);
    for (double r : run.ratio.values) EXPECT_EQ(r, 2.0);
    EXPECT_NEAR(run.labels.at("delta_S")[0], std::log(2.0), 1e-15);
    const FamilyCheck c = check_family(run, FFamily::log(1.0));
    EXPECT_DOUBLE_EQ(c.jarzynski_expected, 0.5);
    EXPECT_LT(c.jarzynski_residual, 1e-15);
}

TEST(Deterministic, Errors) {
    DeterministicPriors pr;
    EXPECT_EQ(code_of([&] { deterministic_hamiltonian_scenario({0, 0}, {0, 1}, pr); }), ErrorCode::NotBijective);
    pr.kind = PriorKind::microcanonical;
    pr.initial_shell = 5.0;
    EXPECT_EQ(code_of([&] { deterministic_hamiltonian_scenario({1, 0}, {0, 1}, pr); }), ErrorCode::EmptyShell);
}

TEST(Jarz2000, DegenerateReservoirGivesPlainReverse) {
    const auto p = validate_distribution({0.3, 0.7});
    const auto q = validate_distribution({0.6, 0.4});
    const Jarz2000Result r = jarz2000_scenario({3, 0, 2, 1}, 2, {0.5, 0.5}, 1.0, p, q);
    ASSERT_EQ(r.delta_s_values.size(), 1u);
    EXPECT_EQ(r.delta_s_values[0], 0.0);
    for (const auto& t : r.triples) EXPECT_NEAR(t.forward, t.hybrid_reverse, 1e-15);
}

TEST(Jarz2000, SwapExampleAgainstEnumeration) {
    // (x, w) -> (w, x) on a 2 x 2 product with E_w = (0, 1), beta = 1.
    const std::vector<std::size_t> perm = {0, 2, 1, 3};
    const std::vector<double> e = {0.0, 1.0};
    const double beta = 1.0;
    const auto p = validate_distribution({0.35, 0.65});
    const auto q = validate_distribution({0.5, 0.5});
    const Jarz2000Result r = jarz2000_scenario(perm, 2, e, beta, p, q);
    EXPECT_LE(r.max_residual, 1e-12);

    const auto pw = oracle::thermal(e, beta);
    // Enumerate all 16 joint transitions for the forward coarse-grained table.
    std::map<std::tuple<int, int, long>, double> fwd;
    std::map<std::tuple<int, int, long>, double> hyb;
    for (int x = 0; x < 2; ++x) {
        for (int w = 0; w < 2; ++w) {
            for (int x2 = 0; x2 < 2; ++x2) {
                for (int w2 = 0; w2 < 2; ++w2) {
                    const bool hit = perm[x * 2 + w] == static_cast<std::size_t>(x2 * 2 + w2);
                    if (!hit) continue;
                    const long ds = std::lround(beta * (e[w2] - e[w]));
                    fwd[{x, x2, ds}] += pw[w];
                    // Reverse of a permutation under the uniform reference is its inverse.
                    hyb[{x2, x, -ds}] += pw[w2];
                }
            }
        }
    }
    ASSERT_FALSE(r.triples.empty());
    for (const auto& t : r.triples) {
        const long ds = std::lround(t.delta_s);
        const double f = fwd.count({(int)t.x, (int)t.x_final, ds}) ? fwd.at({(int)t.x, (int)t.x_final, ds}) : 0.0;
        const double h = hyb.count({(int)t.x_final, (int)t.x, -ds}) ? hyb.at({(int)t.x_final, (int)t.x, -ds}) : 0.0;
        EXPECT_NEAR(t.forward, f, 1e-15);
        EXPECT_NEAR(t.hybrid_reverse, h, 1e-15);
        EXPECT_LE(std::abs(f - std::exp(t.delta_s) * h), 1e-12);
    }
}

TEST(Jarz2000, EntropyMarginalGivesSystemDynamics) {
    const RandomReservoir rr = random_reservoir(3, 4, 99);
    const Jarz2000Result r = jarz2000_scenario(rr.perm, rr.system_size, rr.reservoir_energies, rr.beta, rr.p, rr.q);
    const auto pw = ThermalSpec{rr.reservoir_energies, rr.beta}.distribution();
    const std::size_t nw = rr.reservoir_energies.size();
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(3, 3);
    for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t w = 0; w < nw; ++w) sys(x, rr.perm[x * nw + w] / nw) += pw[w];
    }
    Eigen::MatrixXd marg = Eigen::MatrixXd::Zero(3, 3);
    for (const auto& t : r.triples) marg(t.x, t.x_final) += t.forward;
    EXPECT_LT((marg - sys).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(r.max_residual, 1e-10);
}

TEST(Jarz2000, NotBijective) {
    const auto p = validate_distribution({0.5, 0.5});
    EXPECT_EQ(code_of([&] { jarz2000_scenario({0, 0, 1, 2}, 2, {0, 1}, 1.0, p, p); }), ErrorCode::NotBijective);
}

TEST(Relaxation, ThreeStateJarzynski) {
    const std::vector<double> pre = {0, 1, 2};
    const std::vector<double> post = {0, 2, 1};
    const double beta = 1.0;
    const auto gamma = ThermalSpec{post, beta}.distribution();
    const ScenarioRun run = crooks_work_relaxation_scenario(pre, post, thermalization_channel(gamma, 0.5), beta);
    ASSERT_EQ(run.ratio.size(), 9u);
    // Full enumeration: sum_x p(x) e^{-beta (W_x - dF)} over all nine pairs.
    const auto p = oracle::thermal(pre, beta);
    const double df = oracle::free_energy(post, beta) - oracle::free_energy(pre, beta);
    double avg = 0.0;
    for (int x = 0; x < 3; ++x) avg += p[x] * std::exp(-beta * (post[x] - pre[x] - df));
    EXPECT_NEAR(avg, 1.0, 1e-12);
    EXPECT_NEAR(exp_minus_sigma(run), 1.0, 1e-12);
    EXPECT_LT(omega_label_gap(run), 1e-12);
    EXPECT_LT(check_family(run, FFamily::log(1.0)).crooks.max_residual, 1e-12);
}

TEST(Relaxation, ReverseMatchesDetailedBalanceFormula) {
    const std::vector<double> post = {0.0, 0.4, 1.1};
    const auto gamma = ThermalSpec{post, 1.3}.distribution();
    const StochasticChannel relax = thermalization_channel(gamma, 0.35);
    const ScenarioRun run = crooks_work_relaxation_scenario({0, 0, 0}, post, relax, 1.3);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 3; ++x) {
            const double expect = std::exp(1.3 * (post[y] - post[x])) * relax(x, y);
            EXPECT_NEAR((*run.reverse_channel)(y, x), expect, 1e-14);
        }
    }
}

TEST(Relaxation, AnyLambdaPreservesGamma) {
    const auto gamma = ThermalSpec{{0, 1, 2}, 0.9}.distribution();
    for (double lambda : {0.0, 0.25, 1.0}) {
        EXPECT_LT(invariance_residual(thermalization_channel(gamma, lambda), gamma), 1e-15);
    }
}

TEST(Relaxation, NoDriveNoWork) {
    const auto gamma = ThermalSpec{{0, 1}, 1.0}.distribution();
    const ScenarioRun run = crooks_work_relaxation_scenario({0, 1}, {0, 1}, thermalization_channel(gamma, 0.3), 1.0);
    for (double r : run.ratio.values) EXPECT_NEAR(r, 1.0, 1e-15);
    EXPECT_NEAR(*run.delta_f, 0.0, 1e-15);
}

TEST(Relaxation, NonThermalRelaxationIsRejected) {
    Eigen::MatrixXd m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    EXPECT_EQ(code_of([&] { crooks_work_relaxation_scenario({0, 0}, {0, 1}, StochasticChannel::make(m), 1.0); }),
              ErrorCode::NotInvariant);
}

TEST(TwoMeasurement, UnitalChannelHasUnitEfficacy) {
    TwoMeasurementConfig c;
    c.eps = {0.0, 0.7, 1.5};
    c.eta = {0.2, 0.9, 1.1};
    c.beta = 0.9;
    c.channel = KrausChannel::depolarizing(3, 0.4);
    c.measurement_basis = haar_unitary(3, 5);
    const ScenarioRun run = general_two_measurement_scenario(c);
    EXPECT_NEAR(*run.efficacy, 1.0, 1e-10);
    for (double v : run.labels.at("delta_Phi")) EXPECT_NEAR(v, 0.0, 1e-10);
    EXPECT_NEAR(exp_minus_sigma(run), 1.0, 1e-10);
}

TEST(TwoMeasurement, UnitaryChannelReproducesTasaki) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        TwoMeasurementConfig c;
        c.eps = {0.0, 1.0, 1.7};
        c.eta = {0.3, 0.8, 2.0};
        c.beta = 1.1;
        const CMatrix u = haar_unitary(3, s + 40);
        c.channel = KrausChannel::unitary(u);
        const ScenarioRun a = general_two_measurement_scenario(c);
        const ScenarioRun b = tasaki_scenario(c.eps, c.eta, u, c.beta);
        EXPECT_LT((a.forward.matrix() - b.forward.matrix()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((a.reverse.matrix() - b.reverse.matrix()).cwiseAbs().maxCoeff(), 1e-10);
        ASSERT_EQ(a.ratio.size(), b.ratio.size());
        for (std::size_t i = 0; i < a.ratio.size(); ++i) {
            EXPECT_NEAR(a.ratio.values[i], b.ratio.values[i], 1e-10 * b.ratio.values[i]);
            EXPECT_NEAR(a.labels.at("sigma")[i], b.labels.at("sigma")[i], 1e-10);
        }
    }
}

TEST(TwoMeasurement, AmplitudeDampingClosedForm) {
    const double eta = 0.3;
    const double theta = M_PI / 8;
    TwoMeasurementConfig c;
    c.eps = {0.0, 1.0};
    c.eta = {0.0, 1.0};
    c.beta = 1.0;
    c.channel = KrausChannel::amplitude_damping(eta);
    c.measurement_basis = rotation(theta);
    const ScenarioRun run = general_two_measurement_scenario(c);

    // Two-state chain: a = phi(1|0), b = phi(0|1), gamma = (b, a) / (a + b).
    const double c2 = std::pow(std::cos(theta), 2);
    const double s2 = std::pow(std::sin(theta), 2);
    const double a = s2;
    const double b = eta * c2 + (1 - eta) * s2;
    EXPECT_NEAR((*run.gamma)[0], b / (a + b), 1e-14);
    const auto q = oracle::thermal(c.eta, c.beta);
    const double efficacy = q[0] * (c2 + b) + q[1] * (a + 1 - b);
    EXPECT_NEAR(*run.efficacy, efficacy, 1e-14);
    EXPECT_GT(std::abs(*run.efficacy - 1.0), 1e-3);
    EXPECT_NEAR(exp_minus_sigma(run), 1.0, 1e-10);
    EXPECT_LT(omega_label_gap(run), 1e-12);
    EXPECT_LT(run.diagnostics.at("quantum_classical_reverse_residual"), 1e-10);
}

TEST(TwoMeasurement, ComputationalBasesGiveSingularSteadyState) {
    TwoMeasurementConfig c;
    c.eps = {0.0, 1.0};
    c.eta = {0.0, 1.0};
    c.channel = KrausChannel::amplitude_damping(0.3);
    EXPECT_EQ(code_of([&] { general_two_measurement_scenario(c); }), ErrorCode::SingularSteadyState);
}

TEST(TwoMeasurement, IdentityChannelNeedsGamma) {
    TwoMeasurementConfig c;
    c.eps = {0.0, 1.0};
    c.eta = {0.0, 1.0};
    c.channel = KrausChannel::identity(2);
    EXPECT_EQ(code_of([&] { general_two_measurement_scenario(c); }), ErrorCode::NonUniqueSteadyState);
    c.gamma = validate_distribution({0.4, 0.6});
    EXPECT_NEAR(exp_minus_sigma(general_two_measurement_scenario(c)), 1.0, 1e-12);
}

TEST(Random, ClassicalIsDeterministicAndStochastic) {
    const RandomClassical a = random_classical(5, 31);
    const RandomClassical b = random_classical(5, 31);
    EXPECT_EQ((a.channel.matrix() - b.channel.matrix()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(a.p.mass(), b.p.mass());
    EXPECT_LT((a.channel.matrix().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_GT(a.channel.matrix().minCoeff(), 0.0);
}

TEST(Random, DoublyStochasticColumns) {
    const RandomClassical a = random_classical(6, 3, true);
    EXPECT_LT((a.channel.matrix().colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Random, ScenarioDispatch) {
    RandomDims dims;
    dims.d = 3;
    EXPECT_TRUE(std::holds_alternative<RandomClassical>(random_scenario(RandomKind::classical_channel, dims, 1)));
    EXPECT_TRUE(std::holds_alternative<QuantumProcess>(random_scenario(RandomKind::quantum_process, dims, 1)));
    EXPECT_TRUE(std::holds_alternative<TwoMeasurementConfig>(random_scenario(RandomKind::two_measurement, dims, 1)));
    EXPECT_TRUE(std::holds_alternative<RandomReservoir>(random_scenario(RandomKind::reservoir, dims, 1)));
    const auto tm = std::get<TwoMeasurementConfig>(random_scenario(RandomKind::two_measurement, dims, 1));
    EXPECT_GE(linalg::min_eigenvalue(tm.channel.map().choi()), -1e-12);
}

TEST(Bayesian, RandomScenarioIdentities) {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const RandomClassical rc = random_classical(2 + s % 6, s);
        const ScenarioRun run = bayesian_scenario(rc.channel, rc.p, rc.q);
        EXPECT_LT(ratio_closed_form_residual(run, rc.p, rc.q), 1e-12);
        EXPECT_LT(sigma_label_residual(run), 1e-12);
        EXPECT_NEAR(check_family(run, FFamily::power(2.0)).jarzynski_average, 1.0, 1e-12);
    }
}
