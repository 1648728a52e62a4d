// Randomized acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed here and never relaxed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "retro/pipeline.hpp"
#include "retro/scenario_file.hpp"
#include "retro/scenarios.hpp"

using namespace retro;
namespace fs = std::filesystem;

namespace {

constexpr double kTolJarzynski = 1e-10;
constexpr double kTolCrooks = 1e-9;
constexpr double kTolQuantumClassical = 1e-9;
constexpr double kTolPetz = 1e-10;
constexpr double kTolDoublyStochastic = 1e-10;
constexpr double kTolHybrid = 1e-10;
constexpr double kTolPotential = 1e-10;
constexpr double kMinEfficacyGap = 1e-3;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Worst {
    double value = 0.0;
    void add(double v) { value = std::isnan(v) ? v : std::max(value, v); }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

const std::vector<FFamily>& suite_families() {
    static const std::vector<FFamily> fams = {FFamily::log(0.5), FFamily::log(1.0),   FFamily::log(2.0),
                                              FFamily::power(0.5), FFamily::power(1.0), FFamily::power(2.0)};
    return fams;
}

// <f^-1(g(omega_F))>_F summed directly over the support pairs.
double direct_jarzynski(const ScenarioRun& run, const FFamily& fam) {
    const auto pf = joint_mass_on(run.forward, run.ratio);
    double s = 0.0;
    for (std::size_t i = 0; i < pf.size(); ++i) s += pf[i] * fam.f_inverse(fam.g(fam.f(run.ratio.values[i])));
    return s;
}

std::vector<ScenarioRun> fluctuation_suite() {
    std::vector<ScenarioRun> runs;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const RandomClassical rc = random_classical(2 + s % 15, 1000 + s, s % 3 == 0);
        runs.push_back(bayesian_scenario(rc.channel, rc.p, rc.q));
    }
    for (std::uint64_t s = 0; s < 100; ++s) {
        runs.push_back(general_two_measurement_scenario(random_two_measurement(2 + s % 4, 1 + s % 3, 5000 + s)));
    }
    return runs;
}

Outcome criterion_jarzynski(const std::vector<ScenarioRun>& runs) {
    Worst w;
    for (const auto& run : runs) {
        for (const auto& fam : suite_families()) w.add(std::abs(direct_jarzynski(run, fam) - 1.0));
    }
    return {w.value <= kTolJarzynski, "scenarios=" + std::to_string(runs.size()) + " families=6 max|<f^-1(g(w))>-1|=" +
                                          sci(w.value) + " tol=" + sci(kTolJarzynski)};
}

Outcome criterion_crooks(const std::vector<ScenarioRun>& runs) {
    Worst w;
    for (const auto& run : runs) {
        for (const auto& fam : suite_families()) w.add(check_family(run, fam).crooks.max_residual);
    }
    return {w.value <= kTolCrooks, "scenarios=" + std::to_string(runs.size()) + " max atom residual=" + sci(w.value) +
                                       " tol=" + sci(kTolCrooks)};
}

std::vector<QuantumProcess> quantum_suite() {
    std::vector<QuantumProcess> qps;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const std::size_t d = 2 + s % 4;
        qps.push_back(random_quantum_process(d, 2 + s % 3, 1 + s % d, 9000 + s));
    }
    return qps;
}

Outcome criterion_quantum_classical(const std::vector<QuantumProcess>& qps) {
    Worst w;
    for (const auto& qp : qps) {
        const StochasticChannel phi = induced_transition(qp);
        const Distribution& g = qp.gamma();
        const StochasticChannel q = quantum_retrodicted_transition(qp);
        // Classical Bayes inverse written out entrywise on supp(gamma).
        const auto& in = q.inputs();
        const auto& out = q.outputs();
        for (std::size_t yi = 0; yi < in.size(); ++yi) {
            const std::size_t y = g.alphabet().index_of(in.label(yi));
            double gy = 0.0;
            for (std::size_t x = 0; x < g.size(); ++x) gy += g[x] * phi(x, y);
            for (std::size_t xi = 0; xi < out.size(); ++xi) {
                const std::size_t x = g.alphabet().index_of(out.label(xi));
                w.add(std::abs(q(yi, xi) - g[x] * phi(x, y) / gy));
            }
        }
    }
    return {w.value <= kTolQuantumClassical,
            "processes=" + std::to_string(qps.size()) + " max entrywise gap=" + sci(w.value) + " tol=" +
                sci(kTolQuantumClassical)};
}

Outcome criterion_petz(const std::vector<QuantumProcess>& qps) {
    double min_choi = 0.0;
    Worst trace;
    Worst fixed;
    for (const auto& qp : qps) {
        const PetzMap pm = petz_reverse(qp.channel(), qp.gamma0());
        const auto& ops = pm.map.operators();
        const Eigen::Index din = ops.front().cols();
        const Eigen::Index dout = ops.front().rows();
        CMatrix choi = CMatrix::Zero(din * dout, din * dout);
        CMatrix tp = CMatrix::Zero(din, din);
        for (const auto& k : ops) {
            // vec of K column-major in (input, output) order matches the i * d_out + a indexing.
            Eigen::VectorXcd v(din * dout);
            for (Eigen::Index i = 0; i < din; ++i) {
                for (Eigen::Index a = 0; a < dout; ++a) v(i * dout + a) = k(a, i);
            }
            choi += v * v.adjoint();
            tp += k.adjoint() * k;
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> es(choi);
        min_choi = std::min(min_choi, es.eigenvalues().minCoeff());
        trace.add((tp - pm.input_support).cwiseAbs().maxCoeff());
        const CMatrix image = qp.channel().apply(qp.gamma0());
        fixed.add((pm.apply(image) - qp.gamma0()).cwiseAbs().maxCoeff());
    }
    const bool ok = min_choi >= -kTolPetz && trace.value <= kTolPetz && fixed.value <= kTolPetz;
    return {ok, "processes=" + std::to_string(qps.size()) + " min choi eig=" + sci(min_choi) +
                    " trace residual=" + sci(trace.value) + " fixed point residual=" + sci(fixed.value) +
                    " tol=" + sci(kTolPetz)};
}

Outcome criterion_doubly_stochastic() {
    std::size_t ds = 0;
    std::size_t mismatches = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const RandomClassical rc = random_classical(2 + s % 15, 20000 + s, s % 2 == 0);
        const Eigen::MatrixXd& phi = rc.channel.matrix();
        const bool columns_unit = (phi.colwise().sum().array() - 1.0).abs().maxCoeff() <= kTolDoublyStochastic;
        const SteadyState st = steady_state(rc.channel);
        const StochasticChannel rev = bayes_reverse_channel(rc.channel, st.gamma);
        const bool self_reverse = rev.matrix().rows() == phi.cols() &&
                                  (rev.matrix() - phi.transpose()).cwiseAbs().maxCoeff() <= kTolDoublyStochastic;
        ds += columns_unit;
        mismatches += columns_unit != self_reverse;
    }
    std::size_t tasaki_failures = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const std::size_t d = 2 + s % 7;
        std::vector<double> eps(d);
        std::vector<double> eta(d);
        for (std::size_t i = 0; i < d; ++i) {
            eps[i] = 0.3 * static_cast<double>(i);
            eta[i] = 0.45 * static_cast<double>(i) + 0.1;
        }
        const ScenarioRun run = tasaki_scenario(eps, eta, haar_unitary(d, 30000 + s), 1.0);
        const Eigen::MatrixXd& phi = run.forward_channel->matrix();
        const bool columns_unit = (phi.colwise().sum().array() - 1.0).abs().maxCoeff() <= kTolDoublyStochastic;
        const bool self_reverse =
            (run.reverse_channel->matrix() - phi.transpose()).cwiseAbs().maxCoeff() <= kTolDoublyStochastic;
        tasaki_failures += !(columns_unit && self_reverse);
    }
    return {mismatches == 0 && tasaki_failures == 0 && ds > 0 && ds < 200,
            "channels=200 doubly_stochastic=" + std::to_string(ds) + " iff_mismatches=" + std::to_string(mismatches) +
                " tasaki_failures=" + std::to_string(tasaki_failures) + "/20 tol=" + sci(kTolDoublyStochastic)};
}

Outcome criterion_hybrid() {
    Worst w;
    std::size_t triples = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const RandomReservoir rr = random_reservoir(2 + s % 5, 2 + (s / 5) % 5, 40000 + s);
        const Jarz2000Result r =
            jarz2000_scenario(rr.perm, rr.system_size, rr.reservoir_energies, rr.beta, rr.p, rr.q);
        for (const auto& t : r.triples) {
            w.add(std::abs(t.forward - std::exp(t.delta_s) * t.hybrid_reverse));
            ++triples;
        }
    }
    return {w.value <= kTolHybrid, "scenarios=50 triples=" + std::to_string(triples) + " max residual=" +
                                       sci(w.value) + " tol=" + sci(kTolHybrid)};
}

double exp_minus_sigma(const ScenarioRun& run) {
    const auto pf = joint_mass_on(run.forward, run.ratio);
    const auto& sigma = run.labels.at("sigma");
    double s = 0.0;
    for (std::size_t i = 0; i < pf.size(); ++i) s += pf[i] * std::exp(-sigma[i]);
    return s;
}

double direct_efficacy(const ScenarioRun& run, const std::vector<double>& eta, double beta) {
    const Distribution q = ThermalSpec{eta, beta}.distribution();
    const Eigen::MatrixXd& phi = run.forward_channel->matrix();
    double e = 0.0;
    for (Eigen::Index x = 0; x < phi.rows(); ++x) {
        for (Eigen::Index y = 0; y < phi.cols(); ++y) e += phi(x, y) * q[static_cast<std::size_t>(y)];
    }
    return e;
}

Outcome criterion_potential() {
    Worst jar;
    double min_gap = 1.0;
    Worst unital;
    CMatrix rot(2, 2);
    const double th = M_PI / 8;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    for (double eta : {0.1, 0.3, 0.7}) {
        for (double beta : {0.5, 1.0}) {
            TwoMeasurementConfig c;
            c.eps = {0.0, 1.0};
            c.eta = {0.0, 1.0};
            c.beta = beta;
            c.channel = KrausChannel::amplitude_damping(eta);
            c.measurement_basis = rot;
            const ScenarioRun run = general_two_measurement_scenario(c);
            jar.add(std::abs(exp_minus_sigma(run) - 1.0));
            min_gap = std::min(min_gap, std::abs(direct_efficacy(run, c.eta, beta) - 1.0));

            for (const KrausChannel& sub : {KrausChannel::depolarizing(2, eta), KrausChannel::unitary(haar_unitary(2, 77))}) {
                c.channel = sub;
                const ScenarioRun u = general_two_measurement_scenario(c);
                unital.add(std::abs(direct_efficacy(u, c.eta, beta) - 1.0));
                unital.add(std::abs(*u.efficacy - 1.0));
                jar.add(std::abs(exp_minus_sigma(u) - 1.0));
            }
        }
    }
    const bool ok = jar.value <= kTolPotential && min_gap > kMinEfficacyGap && unital.value <= kTolPotential;
    return {ok, "max|<e^-Sigma>-1|=" + sci(jar.value) + " min|efficacy-1| damping=" + sci(min_gap) +
                    " max|efficacy-1| unital=" + sci(unital.value) + " tol=" + sci(kTolPotential) +
                    " gap>" + sci(kMinEfficacyGap)};
}

Outcome criterion_microcanonical() {
    DeterministicPriors pr;
    pr.kind = PriorKind::microcanonical;
    pr.final_energies = std::vector<double>{1, 1, 0, 0, 0, 0};
    pr.initial_shell = 0.0;
    pr.final_shell = 0.0;
    const ScenarioRun run = deterministic_hamiltonian_scenario({2, 3, 0, 1, 4, 5}, {0, 0, 1, 1, 1, 1}, pr);
    std::size_t exact = 0;
    for (double r : run.ratio.values) exact += r == 2.0;
    const bool ok = !run.ratio.values.empty() && exact == run.ratio.size();
    return {ok, "N(E)=2 N(E')=4 pairs=" + std::to_string(run.ratio.size()) + " exactly_two=" + std::to_string(exact)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion_determinism(const fs::path& examples) {
    const fs::path root = fs::temp_directory_path() / "retro_acceptance_determinism";
    fs::remove_all(root);
    std::size_t files = 0;
    std::size_t differing = 0;
    std::vector<fs::path> inputs;
    for (const auto& e : fs::directory_iterator(examples)) {
        if (e.path().extension() == ".json") inputs.push_back(e.path());
    }
    std::sort(inputs.begin(), inputs.end());
    for (const auto& in : inputs) {
        const ScenarioFile sf = parse_scenario_file(in);
        for (std::uint64_t seed : {std::uint64_t{0}, std::uint64_t{17}}) {
            RunOptions opt;
            opt.seed = seed;
            opt.plot = true;
            const std::string tag = in.stem().string() + "_" + std::to_string(seed);
            run_pipeline(sf, root / (tag + "_a"), opt);
            run_pipeline(sf, root / (tag + "_b"), opt);
            for (const auto& out : fs::directory_iterator(root / (tag + "_a"))) {
                ++files;
                differing += slurp(out.path()) != slurp(root / (tag + "_b") / out.path().filename());
            }
        }
    }
    fs::remove_all(root);
    return {files > 0 && differing == 0, "scenario files=" + std::to_string(inputs.size()) + " outputs compared=" +
                                             std::to_string(files) + " differing=" + std::to_string(differing)};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path examples = argc > 1 ? fs::path(argv[1]) : fs::path(RETRO_SOURCE_DIR) / "examples_scenarios";
    bool all = true;
    const auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && o.pass;
        std::printf("%s [%d] %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    };

    std::vector<ScenarioRun> runs;
    report(1, "jarzynski-like identity", [&] {
        runs = fluctuation_suite();
        return criterion_jarzynski(runs);
    });
    report(2, "crooks atom relation", [&] { return criterion_crooks(runs); });
    std::vector<QuantumProcess> qps;
    report(3, "quantum/classical retrodiction", [&] {
        qps = quantum_suite();
        return criterion_quantum_classical(qps);
    });
    report(4, "petz map validity", [&] { return criterion_petz(qps); });
    report(5, "doubly stochastic equivalence", criterion_doubly_stochastic);
    report(6, "hybrid reversal", criterion_hybrid);
    report(7, "nonequilibrium potential", criterion_potential);
    report(8, "microcanonical ratio", criterion_microcanonical);
    report(9, "determinism", [&] { return criterion_determinism(examples); });
    return all ? 0 : 1;
}
