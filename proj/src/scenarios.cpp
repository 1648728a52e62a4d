#include "retro/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace retro {

Distribution ThermalSpec::distribution(const Alphabet& alphabet) const {
    if (alphabet.size() != energies.size()) {
        throw Error(ErrorCode::DimensionMismatch, "thermal energies do not match the alphabet size");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
    if (energies.empty()) throw Error(ErrorCode::EmptySupport, "no energies given");
    const double e_min = *std::min_element(energies.begin(), energies.end());
    std::vector<double> w(energies.size());
    double z = 0.0;
    for (std::size_t i = 0; i < energies.size(); ++i) {
        w[i] = std::exp(-beta * (energies[i] - e_min));
        z += w[i];
    }
    for (double& v : w) v /= z;
    return validate_distribution(alphabet, std::move(w));
}

double ThermalSpec::free_energy() const {
    if (energies.empty()) throw Error(ErrorCode::EmptySupport, "no energies given");
    const double e_min = *std::min_element(energies.begin(), energies.end());
    double z = 0.0;
    for (double e : energies) z += std::exp(-beta * (e - e_min));
    return e_min - std::log(z) / beta;
}

namespace {

struct Assembled {
    JointProcess forward;
    JointProcess reverse;
    RatioTable ratio;
};

Assembled assemble(const Distribution& p, const StochasticChannel& phi, const Distribution& q,
                   const StochasticChannel& phihat, SupportPolicy policy = SupportPolicy::strict) {
    Assembled a;
    a.forward = forward_process(p, phi);
    a.reverse = reverse_process(q, phihat);
    a.ratio = forward_reverse_ratio(a.forward, a.reverse, policy);
    return a;
}

// Evaluates fn(x, y) on every ratio pair, by position in the forward alphabets.
template <typename Fn>
std::vector<double> per_pair(const RatioTable& ratio, Fn fn) {
    std::vector<double> out;
    out.reserve(ratio.size());
    for (const auto& pair : ratio.pairs) out.push_back(fn(pair.x, pair.y));
    return out;
}

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + " has size " + std::to_string(got) + ", expected " + std::to_string(want));
    }
}

void require_permutation(const std::vector<std::size_t>& perm) {
    std::vector<char> seen(perm.size(), 0);
    for (std::size_t v : perm) {
        if (v >= perm.size() || seen[v]) throw Error(ErrorCode::NotBijective, "map is not a permutation");
        seen[v] = 1;
    }
}

StochasticChannel permutation_channel(const std::vector<std::size_t>& perm) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(perm.size(), perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) m(i, perm[i]) = 1.0;
    return StochasticChannel::make(std::move(m));
}

std::vector<DensityMatrix> basis_preparations(const CMatrix& basis) {
    std::vector<DensityMatrix> preps;
    for (Eigen::Index k = 0; k < basis.cols(); ++k) preps.push_back(DensityMatrix::pure(basis.col(k)));
    return preps;
}

}  // namespace

ScenarioRun bayesian_scenario(const StochasticChannel& channel, const Distribution& p, const Distribution& q,
                              const std::optional<Distribution>& gamma) {
    ScenarioRun run;
    run.kind = "classical";
    Distribution g;
    if (gamma) {
        g = *gamma;
        run.gamma_unique = std::nullopt;
    } else {
        const SteadyState ss = steady_state(channel);
        if (!ss.unique) {
            throw Error(ErrorCode::NonUniqueSteadyState,
                        std::to_string(ss.recurrent_classes.size()) + " closed classes; supply gamma explicitly");
        }
        g = ss.gamma;
        run.gamma_unique = true;
    }
    const StochasticChannel phihat = bayes_reverse_channel(channel, g);
    auto a = assemble(p, channel, q, phihat);
    run.forward = std::move(a.forward);
    run.reverse = std::move(a.reverse);
    run.ratio = std::move(a.ratio);
    const Alphabet& xs = run.forward.xs();
    const Alphabet& ys = run.forward.ys();
    run.labels["sigma"] = per_pair(run.ratio, [&](std::size_t x, std::size_t y) {
        return std::log(p[x]) - std::log(q.at(ys.label(y))) + std::log(g.at(ys.label(y))) -
               std::log(g.at(xs.label(x)));
    });
    run.gamma = g;
    run.forward_channel = channel;
    run.reverse_channel = phihat;
    return run;
}

ScenarioRun tasaki_scenario(const std::vector<double>& eps, const std::vector<double>& eta, const CMatrix& u,
                            double beta) {
    const std::size_t d = static_cast<std::size_t>(u.rows());
    if (u.rows() != u.cols()) throw Error(ErrorCode::DimensionMismatch, "unitary must be square");
    require_size(eps.size(), d, "eps");
    require_size(eta.size(), d, "eta");

    const KrausChannel channel = KrausChannel::unitary(u);
    const CMatrix id = CMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const StochasticChannel phi = induced_transition(basis_preparations(id), channel, Povm::projective(id));
    const Distribution gamma = uniform_distribution(phi.inputs());
    const StochasticChannel phihat = bayes_reverse_channel(phi, gamma);

    const ThermalSpec h0{eps, beta};
    const ThermalSpec ht{eta, beta};
    const double delta_f = ht.free_energy() - h0.free_energy();

    ScenarioRun run;
    run.kind = "tasaki";
    auto a = assemble(h0.distribution(phi.inputs()), phi, ht.distribution(phi.outputs()), phihat);
    run.forward = std::move(a.forward);
    run.reverse = std::move(a.reverse);
    run.ratio = std::move(a.ratio);
    run.labels["W"] = per_pair(run.ratio, [&](std::size_t x, std::size_t y) { return eta[y] - eps[x]; });
    run.labels["sigma"] =
        per_pair(run.ratio, [&](std::size_t x, std::size_t y) { return beta * (eta[y] - eps[x] - delta_f); });
    run.beta = beta;
    run.delta_f = delta_f;
    run.gamma = gamma;
    run.gamma_unique = std::nullopt;
    run.forward_channel = phi;
    run.reverse_channel = phihat;
    return run;
}

ScenarioRun deterministic_hamiltonian_scenario(const std::vector<std::size_t>& perm,
                                               const std::vector<double>& energies,
                                               const DeterministicPriors& priors) {
    require_permutation(perm);
    require_size(energies.size(), perm.size(), "energies");
    const std::vector<double>& final_energies = priors.final_energies ? *priors.final_energies : energies;
    require_size(final_energies.size(), perm.size(), "final energies");

    const StochasticChannel phi = permutation_channel(perm);
    const Distribution gamma = uniform_distribution(phi.inputs());
    const StochasticChannel phihat = bayes_reverse_channel(phi, gamma);
    const Alphabet& labels = phi.inputs();

    ScenarioRun run;
    run.kind = "deterministic";
    run.gamma = gamma;
    run.forward_channel = phi;
    run.reverse_channel = phihat;

    if (priors.kind == PriorKind::thermal) {
        const ThermalSpec h0{energies, priors.beta};
        const ThermalSpec ht{final_energies, priors.beta};
        const double delta_f = ht.free_energy() - h0.free_energy();
        auto a = assemble(h0.distribution(labels), phi, ht.distribution(labels), phihat);
        run.forward = std::move(a.forward);
        run.reverse = std::move(a.reverse);
        run.ratio = std::move(a.ratio);
        run.labels["E"] = per_pair(run.ratio, [&](std::size_t x, std::size_t y) {
            return final_energies[y] - energies[x];
        });
        run.labels["sigma"] = per_pair(run.ratio, [&](std::size_t x, std::size_t y) {
            return priors.beta * (final_energies[y] - energies[x] - delta_f);
        });
        run.beta = priors.beta;
        run.delta_f = delta_f;
        return run;
    }

    auto shell = [&](const std::vector<double>& e, double level) {
        std::vector<double> w(e.size(), 0.0);
        std::size_t n = 0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (std::abs(e[i] - level) <= priors.shell_tol) {
                w[i] = 1.0;
                ++n;
            }
        }
        if (n == 0) throw Error(ErrorCode::EmptyShell, "no label has energy " + std::to_string(level));
        for (double& v : w) v /= static_cast<double>(n);
        return std::make_pair(validate_distribution(labels, std::move(w)), n);
    };
    const auto [p, n_initial] = shell(energies, priors.initial_shell);
    const auto [q, n_final] = shell(final_energies, priors.final_shell);
    auto a = assemble(p, phi, q, phihat, SupportPolicy::common);
    run.forward = std::move(a.forward);
    run.reverse = std::move(a.reverse);
    run.ratio = std::move(a.ratio);
    const double delta_s = std::log(static_cast<double>(n_final)) - std::log(static_cast<double>(n_initial));
    run.labels["delta_S"] = std::vector<double>(run.ratio.size(), delta_s);
    run.labels["sigma"] = run.labels["delta_S"];
    return run;
}

Jarz2000Result jarz2000_scenario(const std::vector<std::size_t>& perm, std::size_t system_size,
                                 const std::vector<double>& reservoir_energies, double beta, const Distribution& p,
                                 const Distribution& q, double merge_tol) {
    const std::size_t nw = reservoir_energies.size();
    if (system_size == 0 || nw == 0) throw Error(ErrorCode::EmptySupport, "empty system or reservoir");
    require_size(perm.size(), system_size * nw, "joint permutation");
    require_size(p.size(), system_size, "p");
    require_size(q.size(), system_size, "q");
    require_permutation(perm);

    const ThermalSpec reservoir{reservoir_energies, beta};
    const Distribution pw = reservoir.distribution();
    const Distribution& qw = pw;

    // Group the entropy changes beta (E_w' - E_w) by single linkage.
    std::vector<std::pair<double, std::size_t>> ds;
    for (std::size_t w = 0; w < nw; ++w) {
        for (std::size_t w2 = 0; w2 < nw; ++w2) {
            ds.emplace_back(beta * (reservoir_energies[w2] - reservoir_energies[w]), w * nw + w2);
        }
    }
    std::sort(ds.begin(), ds.end());
    std::vector<std::size_t> group_of(nw * nw, 0);
    std::vector<double> group_values;
    for (std::size_t start = 0; start < ds.size();) {
        std::size_t end = start + 1;
        while (end < ds.size() && ds[end].first - ds[end - 1].first <= merge_tol) ++end;
        double sum = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            sum += ds[k].first;
            group_of[ds[k].second] = group_values.size();
        }
        group_values.push_back(sum / static_cast<double>(end - start));
        start = end;
    }
    const std::size_t ng = group_values.size();

    // Full joint dynamics and its Bayesian reverse against the uniform reference.
    const StochasticChannel full = permutation_channel(perm);
    const StochasticChannel full_reverse = bayes_reverse_channel(full, uniform_distribution(full.inputs()));

    std::vector<std::string> y_labels;
    for (std::size_t x2 = 0; x2 < system_size; ++x2) {
        for (std::size_t k = 0; k < ng; ++k) y_labels.push_back(std::to_string(x2) + "|" + std::to_string(k));
    }
    const Alphabet xs = p.alphabet();
    const Alphabet ys(y_labels);
    auto col = [&](std::size_t x2, std::size_t k) { return x2 * ng + k; };
    auto negated = [&](std::size_t k) { return ng - 1 - k; };

    Eigen::MatrixXd fwd = Eigen::MatrixXd::Zero(system_size, system_size * ng);
    Eigen::MatrixXd hyb = Eigen::MatrixXd::Zero(system_size, system_size * ng);
    for (std::size_t x = 0; x < system_size; ++x) {
        for (std::size_t w = 0; w < nw; ++w) {
            const std::size_t to = perm[x * nw + w];
            const std::size_t x2 = to / nw;
            const std::size_t w2 = to % nw;
            fwd(x, col(x2, group_of[w * nw + w2])) += full(x * nw + w, to) * pw[w];
        }
    }
    // phihat(x, -dS | x') = sum over (w, w') with beta (E_w - E_w') = -dS of
    // Phihat(x, w | x', w') Q(w'). The row index of `hyb` is x', the column (x, group of dS).
    // The uniform reference has full support, so reverse positions are joint indices.
    for (std::size_t from = 0; from < full.inputs().size(); ++from) {
        const std::size_t x2 = from / nw;
        const std::size_t w2 = from % nw;
        for (std::size_t back = 0; back < full.inputs().size(); ++back) {
            const double v = full_reverse(from, back);
            if (v == 0.0) continue;
            const std::size_t x = back / nw;
            const std::size_t w = back % nw;
            // Reverse entropy change beta (E_w - E_w') lands in the mirror group of beta (E_w' - E_w).
            hyb(x2, col(x, negated(group_of[w * nw + w2]))) += v * qw[w2];
        }
    }

    Jarz2000Result result;
    result.delta_s_values = group_values;

    // Mirror symmetry of the grouped values is what makes `negated` valid.
    for (std::size_t k = 0; k < ng; ++k) {
        if (std::abs(group_values[k] + group_values[negated(k)]) > 2.0 * merge_tol) {
            throw Error(ErrorCode::InvalidArgument, "entropy grouping is not symmetric under negation");
        }
    }

    for (std::size_t x = 0; x < system_size; ++x) {
        for (std::size_t x2 = 0; x2 < system_size; ++x2) {
            for (std::size_t k = 0; k < ng; ++k) {
                HybridTriple t;
                t.x = x;
                t.x_final = x2;
                t.delta_s = group_values[k];
                t.forward = fwd(x, col(x2, k));
                t.hybrid_reverse = hyb(x2, col(x, negated(k)));
                if (t.forward == 0.0 && t.hybrid_reverse == 0.0) continue;
                t.residual = std::abs(t.forward - std::exp(t.delta_s) * t.hybrid_reverse);
                result.max_residual = std::max(result.max_residual, t.residual);
                result.triples.push_back(t);
            }
        }
    }

    // Forward channel X -> (X x dS); reverse channel X -> (X x -dS), re-indexed so
    // that pair (x, (x', k)) of the reverse process carries phihat(x, -dS_k | x').
    const StochasticChannel phi = StochasticChannel::make(xs, ys, fwd);
    Eigen::MatrixXd rev_table = Eigen::MatrixXd::Zero(system_size * ng, system_size);
    for (std::size_t x2 = 0; x2 < system_size; ++x2) {
        for (std::size_t k = 0; k < ng; ++k) {
            for (std::size_t x = 0; x < system_size; ++x) {
                rev_table(col(x2, k), x) = hyb(x2, col(x, negated(k))) * q[x2];
            }
        }
    }
    Eigen::MatrixXd pr = rev_table.transpose();
    Eigen::MatrixXd pf(system_size, system_size * ng);
    for (std::size_t x = 0; x < system_size; ++x) pf.row(x) = p[x] * fwd.row(x);

    ScenarioRun& run = result.run;
    run.kind = "jarz2000";
    run.forward = JointProcess::make(xs, ys, pf, Direction::forward);
    run.reverse = JointProcess::make(xs, ys, pr, Direction::reverse);
    run.ratio = forward_reverse_ratio(run.forward, run.reverse);
    run.labels["delta_S"] = per_pair(run.ratio, [&](std::size_t, std::size_t y) { return group_values[y % ng]; });
    run.labels["sigma"] = per_pair(run.ratio, [&](std::size_t x, std::size_t y) {
        return std::log(p[x]) - std::log(q[y / ng]) + group_values[y % ng];
    });
    run.beta = beta;
    run.forward_channel = phi;
    run.diagnostics["hybrid_max_residual"] = result.max_residual;
    return result;
}

StochasticChannel thermalization_channel(const Distribution& gamma, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must lie in [0, 1]");
    const std::size_t n = gamma.size();
    Eigen::MatrixXd m = (1.0 - lambda) * Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) += lambda * gamma[j];
    }
    return StochasticChannel::make(gamma.alphabet(), gamma.alphabet(), std::move(m));
}

ScenarioRun crooks_work_relaxation_scenario(const std::vector<double>& e_pre, const std::vector<double>& e_post,
                                            const StochasticChannel& relax, double beta, double tol_fix) {
    const std::size_t n = e_pre.size();
    require_size(e_post.size(), n, "post-drive energies");
    if (!relax.is_square() || relax.inputs().size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "relaxation channel must be square over the energy labels");
    }
    const ThermalSpec pre{e_pre, beta};
    const ThermalSpec post{e_post, beta};
    const Distribution gamma = post.distribution(relax.inputs());
    const double residual = invariance_residual(relax, gamma);
    if (residual > tol_fix) {
        throw Error(ErrorCode::NotInvariant,
                    "relaxation does not preserve the post-drive thermal state (residual " +
                        std::to_string(residual) + ")");
    }
    const StochasticChannel phihat = bayes_reverse_channel(relax, gamma, tol_fix);
    const double delta_f = post.free_energy() - pre.free_energy();

    ScenarioRun run;
    run.kind = "crooks_relaxation";
    auto a = assemble(pre.distribution(relax.inputs()), relax, gamma, phihat);
    run.forward = std::move(a.forward);
    run.reverse = std::move(a.reverse);
    run.ratio = std::move(a.ratio);
    run.labels["W"] = per_pair(run.ratio, [&](std::size_t x, std::size_t) { return e_post[x] - e_pre[x]; });
    run.labels["sigma"] =
        per_pair(run.ratio, [&](std::size_t x, std::size_t) { return beta * (e_post[x] - e_pre[x] - delta_f); });
    run.beta = beta;
    run.delta_f = delta_f;
    run.gamma = gamma;
    run.forward_channel = relax;
    run.reverse_channel = phihat;
    return run;
}

ScenarioRun general_two_measurement_scenario(const TwoMeasurementConfig& config) {
    const std::size_t d = config.channel.input_dim();
    if (config.channel.output_dim() != d) {
        throw Error(ErrorCode::DimensionMismatch, "two-measurement scenario needs a channel on one space");
    }
    require_size(config.eps.size(), d, "eps");
    require_size(config.eta.size(), d, "eta");
    const auto di = static_cast<Eigen::Index>(d);
    const CMatrix b0 = config.preparation_basis.size() ? config.preparation_basis : CMatrix::Identity(di, di);
    const CMatrix b1 = config.measurement_basis.size() ? config.measurement_basis : CMatrix::Identity(di, di);
    if (b0.rows() != di || b0.cols() != di || b1.rows() != di || b1.cols() != di) {
        throw Error(ErrorCode::DimensionMismatch, "bases must be d x d");
    }

    const std::vector<DensityMatrix> preps = basis_preparations(b0);
    const Povm povm = Povm::projective(b1);
    const StochasticChannel phi = induced_transition(preps, config.channel, povm);

    ScenarioRun run;
    run.kind = "two_measurement";
    Distribution gamma;
    if (config.gamma) {
        gamma = *config.gamma;
        const double residual = invariance_residual(phi, gamma);
        if (residual > kTolFix) {
            throw Error(ErrorCode::NotInvariant, "supplied gamma is not invariant (residual " +
                                                     std::to_string(residual) + ")");
        }
    } else {
        const SteadyState ss = steady_state(phi);
        if (!ss.unique) {
            throw Error(ErrorCode::NonUniqueSteadyState,
                        std::to_string(ss.recurrent_classes.size()) + " closed classes; supply gamma explicitly");
        }
        gamma = ss.gamma;
        run.gamma_unique = true;
    }
    for (std::size_t x = 0; x < d; ++x) {
        if (!(gamma[x] > 0.0)) {
            throw Error(ErrorCode::SingularSteadyState, "steady state vanishes on label '" +
                                                            gamma.alphabet().label(x) + "'");
        }
    }

    const double beta = config.beta;
    const ThermalSpec h0{config.eps, beta};
    const ThermalSpec ht{config.eta, beta};
    const double delta_f = ht.free_energy() - h0.free_energy();
    const Distribution p = h0.distribution(phi.inputs());
    const Distribution q = ht.distribution(phi.outputs());
    std::vector<double> potential(d);
    for (std::size_t x = 0; x < d; ++x) potential[x] = -std::log(gamma[x]) / beta;

    const StochasticChannel phihat = bayes_reverse_channel(phi, gamma);
    auto a = assemble(p, phi, q, phihat);
    run.forward = std::move(a.forward);
    run.reverse = std::move(a.reverse);
    run.ratio = std::move(a.ratio);
    run.labels["W"] =
        per_pair(run.ratio, [&](std::size_t x, std::size_t y) { return config.eta[y] - config.eps[x]; });
    run.labels["delta_Phi"] =
        per_pair(run.ratio, [&](std::size_t x, std::size_t y) { return potential[y] - potential[x]; });
    run.labels["sigma"] = per_pair(run.ratio, [&](std::size_t x, std::size_t y) {
        return beta * (config.eta[y] - config.eps[x] - (potential[y] - potential[x]) - delta_f);
    });

    double efficacy = 0.0;
    for (std::size_t x = 0; x < d; ++x) {
        for (std::size_t y = 0; y < d; ++y) efficacy += phi(x, y) * q[y];
    }

    // Same reverse transition obtained through the Petz map and retrodictive states.
    const QuantumProcess qp = QuantumProcess::make(preps, config.channel, povm, gamma);
    const StochasticChannel quantum_reverse = quantum_retrodicted_transition(qp);
    double consistency = 0.0;
    for (std::size_t y = 0; y < quantum_reverse.inputs().size(); ++y) {
        const std::size_t yc = phihat.inputs().index_of(quantum_reverse.inputs().label(y));
        for (std::size_t x = 0; x < quantum_reverse.outputs().size(); ++x) {
            const std::size_t xc = phihat.outputs().index_of(quantum_reverse.outputs().label(x));
            consistency = std::max(consistency, std::abs(quantum_reverse(y, x) - phihat(yc, xc)));
        }
    }

    run.beta = beta;
    run.delta_f = delta_f;
    run.efficacy = efficacy;
    run.gamma = gamma;
    run.forward_channel = phi;
    run.reverse_channel = phihat;
    run.diagnostics["quantum_classical_reverse_residual"] = consistency;
    return run;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> dirichlet_weights(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> w(n);
    double sum = 0.0;
    for (double& v : w) {
        v = -std::log(1.0 - unit(rng));
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

Distribution random_distribution(const Alphabet& alphabet, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return validate_distribution(alphabet, dirichlet_weights(alphabet.size(), rng));
}

RandomClassical random_classical(std::size_t d, std::uint64_t seed, bool doubly_stochastic) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd m(n, n);
    if (!doubly_stochastic) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                m(i, j) = 1.0 - unit(rng);
                sum += m(i, j);
            }
            m.row(i) /= sum;
        }
    } else {
        const std::size_t terms = d + 1;
        const std::vector<double> w = dirichlet_weights(terms + 1, rng);
        m = Eigen::MatrixXd::Constant(n, n, w[0] / static_cast<double>(d));
        std::vector<std::size_t> perm(d);
        for (std::size_t t = 0; t < terms; ++t) {
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (std::size_t i = 0; i < d; ++i) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i])) += w[t + 1];
            }
        }
    }
    const Alphabet labels = Alphabet::indexed(d);
    return RandomClassical{StochasticChannel::make(labels, labels, std::move(m)),
                           random_distribution(labels, derive_seed(seed, 1)),
                           random_distribution(labels, derive_seed(seed, 2))};
}

TwoMeasurementConfig random_two_measurement(std::size_t d, std::size_t kraus_rank, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 10));
    std::uniform_real_distribution<double> energy(0.0, 2.0);
    std::uniform_real_distribution<double> inverse_temperature(0.3, 2.0);
    TwoMeasurementConfig c;
    c.eps.resize(d);
    c.eta.resize(d);
    for (double& e : c.eps) e = energy(rng);
    for (double& e : c.eta) e = energy(rng);
    c.beta = inverse_temperature(rng);
    c.channel = random_channel(d, d, kraus_rank, derive_seed(seed, 11));
    c.preparation_basis = haar_unitary(d, derive_seed(seed, 12));
    c.measurement_basis = haar_unitary(d, derive_seed(seed, 13));
    return c;
}

QuantumProcess random_quantum_process(std::size_t d, std::size_t labels, std::size_t kraus_rank,
                                      std::uint64_t seed) {
    std::vector<DensityMatrix> preps;
    for (std::size_t x = 0; x < labels; ++x) {
        preps.push_back(random_density_matrix(d, d, derive_seed(seed, 100 + x)));
    }
    return QuantumProcess::make(std::move(preps), random_channel(d, d, kraus_rank, derive_seed(seed, 20)),
                                random_povm(d, labels, derive_seed(seed, 21)));
}

RandomReservoir random_reservoir(std::size_t system_size, std::size_t reservoir_size, std::uint64_t seed) {
    if (system_size == 0 || reservoir_size == 0) throw Error(ErrorCode::InvalidArgument, "sizes must be positive");
    std::mt19937_64 rng(derive_seed(seed, 30));
    std::uniform_int_distribution<int> level(0, 4);
    std::uniform_real_distribution<double> inverse_temperature(0.5, 1.5);
    RandomReservoir r;
    r.system_size = system_size;
    r.reservoir_energies.resize(reservoir_size);
    for (double& e : r.reservoir_energies) e = 0.5 * level(rng);
    r.beta = inverse_temperature(rng);
    r.perm.resize(system_size * reservoir_size);
    std::iota(r.perm.begin(), r.perm.end(), 0);
    std::shuffle(r.perm.begin(), r.perm.end(), rng);
    const Alphabet xs = Alphabet::indexed(system_size);
    r.p = random_distribution(xs, derive_seed(seed, 31));
    r.q = random_distribution(xs, derive_seed(seed, 32));
    return r;
}

ScenarioInputs random_scenario(RandomKind kind, const RandomDims& dims, std::uint64_t seed) {
    switch (kind) {
        case RandomKind::classical_channel: return random_classical(dims.d, seed, false);
        case RandomKind::doubly_stochastic_channel: return random_classical(dims.d, seed, true);
        case RandomKind::quantum_process: return random_quantum_process(dims.d, dims.labels, dims.kraus_rank, seed);
        case RandomKind::two_measurement: return random_two_measurement(dims.d, dims.kraus_rank, seed);
        case RandomKind::reservoir: return random_reservoir(dims.d, dims.reservoir, seed);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown random scenario kind");
}

// ---------------------------------------------------------------------------

FamilyCheck check_family(const ScenarioRun& run, const FFamily& family, double merge_tol) {
    FamilyCheck c;
    c.family = family.name();
    c.omega = omega_variables(run.ratio, family);
    c.mu_f = measure_of(run.forward, c.omega.forward, merge_tol);
    c.mu_r = measure_of(run.reverse, c.omega.reverse, merge_tol);
    c.jarzynski_average = jarzynski_average(run.forward, c.omega.forward, family);
    c.jarzynski_expected = 1.0 - run.ratio.dropped_reverse_mass;
    c.jarzynski_residual = std::abs(c.jarzynski_average - c.jarzynski_expected);
    c.crooks = crooks_residuals(c.mu_f, c.mu_r, family);
    c.f_divergence = f_divergence(run.forward, run.reverse, family);
    return c;
}

double sigma_label_residual(const ScenarioRun& run) {
    const auto it = run.labels.find("sigma");
    if (it == run.labels.end()) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < run.ratio.size(); ++i) {
        worst = std::max(worst, std::abs(std::log(run.ratio.values[i]) - it->second[i]));
    }
    return worst;
}

double ratio_closed_form_residual(const ScenarioRun& run, const Distribution& p, const Distribution& q) {
    if (!run.gamma) throw Error(ErrorCode::InvalidArgument, "run carries no reference gamma");
    const auto closed = bayes_ratio_closed_form(run.ratio, p, q, *run.gamma);
    double worst = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i) {
        worst = std::max(worst, std::abs(run.ratio.values[i] - closed[i]) / run.ratio.values[i]);
    }
    return worst;
}

}  // namespace retro
