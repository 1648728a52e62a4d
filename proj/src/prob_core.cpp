#include "retro/prob_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace retro {

// ---------------------------------------------------------------------------
// Alphabet

Alphabet::Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    index_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (!index_.emplace(labels_[i], i).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate label '" + labels_[i] + "'");
        }
    }
}

Alphabet Alphabet::indexed(std::size_t n) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
    return Alphabet(std::move(labels));
}

std::optional<std::size_t> Alphabet::find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Alphabet::index_of(const std::string& label) const {
    auto i = find(label);
    if (!i) throw Error(ErrorCode::AlphabetMismatch, "unknown label '" + label + "'");
    return *i;
}

Alphabet Alphabet::subset(std::span<const std::size_t> keep) const {
    std::vector<std::string> out;
    out.reserve(keep.size());
    for (std::size_t i : keep) out.push_back(labels_.at(i));
    return Alphabet(std::move(out));
}

// ---------------------------------------------------------------------------
// Distribution

Eigen::VectorXd Distribution::vector() const {
    return Eigen::Map<const Eigen::VectorXd>(mass_.data(), static_cast<Eigen::Index>(mass_.size()));
}

std::vector<std::size_t> Distribution::support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        if (mass_[i] > 0.0) out.push_back(i);
    }
    return out;
}

Distribution validate_distribution(Alphabet alphabet, std::vector<double> mass, double tol_norm) {
    if (mass.empty()) throw Error(ErrorCode::InvalidArgument, "empty mass list");
    if (alphabet.size() != mass.size()) {
        throw Error(ErrorCode::AlphabetMismatch, "alphabet has " + std::to_string(alphabet.size()) +
                                                     " labels but mass has " +
                                                     std::to_string(mass.size()) + " entries");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (!std::isfinite(mass[i])) {
            throw Error(ErrorCode::InvalidArgument, "non-finite mass at '" + alphabet.label(i) + "'");
        }
        if (mass[i] < 0.0) {
            throw Error(ErrorCode::NegativeMass, "mass " + std::to_string(mass[i]) + " at '" +
                                                     alphabet.label(i) + "'");
        }
        total += mass[i];
    }
    if (std::abs(total - 1.0) > tol_norm) {
        throw Error(ErrorCode::NotNormalized, "masses sum to " + std::to_string(total));
    }
    if (total != 1.0) {
        for (double& m : mass) m /= total;
    }
    return Distribution(std::move(alphabet), std::move(mass));
}

Distribution validate_distribution(std::vector<double> mass, double tol_norm) {
    auto alphabet = Alphabet::indexed(mass.size());
    return validate_distribution(std::move(alphabet), std::move(mass), tol_norm);
}

Distribution uniform_distribution(const Alphabet& alphabet) {
    const double w = 1.0 / static_cast<double>(alphabet.size());
    return validate_distribution(alphabet, std::vector<double>(alphabet.size(), w));
}

Distribution point_mass(const Alphabet& alphabet, std::size_t at) {
    std::vector<double> m(alphabet.size(), 0.0);
    m.at(at) = 1.0;
    return validate_distribution(alphabet, std::move(m));
}

Distribution restrict_to_support(const Distribution& d) {
    auto keep = d.support();
    std::vector<double> m;
    m.reserve(keep.size());
    for (std::size_t i : keep) m.push_back(d[i]);
    return validate_distribution(d.alphabet().subset(keep), std::move(m));
}

// ---------------------------------------------------------------------------
// StochasticChannel

StochasticChannel StochasticChannel::make(Alphabet inputs, Alphabet outputs, Eigen::MatrixXd table,
                                          double tol_norm) {
    if (static_cast<std::size_t>(table.rows()) != inputs.size() ||
        static_cast<std::size_t>(table.cols()) != outputs.size()) {
        throw Error(ErrorCode::DimensionMismatch, "table shape does not match alphabets");
    }
    if (inputs.empty() || outputs.empty()) {
        throw Error(ErrorCode::InvalidArgument, "channel alphabets must be nonempty");
    }
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(table.cols()));
        for (Eigen::Index j = 0; j < table.cols(); ++j) row[static_cast<std::size_t>(j)] = table(i, j);
        try {
            auto d = validate_distribution(outputs, std::move(row), tol_norm);
            for (Eigen::Index j = 0; j < table.cols(); ++j) table(i, j) = d[static_cast<std::size_t>(j)];
        } catch (const Error& e) {
            throw Error(e.code(), "row '" + inputs.label(static_cast<std::size_t>(i)) + "': " + e.detail());
        }
    }
    return StochasticChannel(std::move(inputs), std::move(outputs), std::move(table));
}

StochasticChannel StochasticChannel::make(Eigen::MatrixXd table, double tol_norm) {
    auto in = Alphabet::indexed(static_cast<std::size_t>(table.rows()));
    auto out = Alphabet::indexed(static_cast<std::size_t>(table.cols()));
    return make(std::move(in), std::move(out), std::move(table), tol_norm);
}

Distribution StochasticChannel::propagate(const Distribution& prior) const {
    if (!(prior.alphabet() == inputs_)) {
        throw Error(ErrorCode::AlphabetMismatch, "prior alphabet differs from channel inputs");
    }
    Eigen::VectorXd out = table_.transpose() * prior.vector();
    std::vector<double> m(out.data(), out.data() + out.size());
    for (double& v : m) v = std::max(v, 0.0);
    return validate_distribution(outputs_, std::move(m), 1e-9);
}

// ---------------------------------------------------------------------------
// Steady states

namespace {

// Tarjan's algorithm on the digraph x -> y whenever phi(y|x) > 0.
std::vector<std::vector<std::size_t>> strongly_connected_components(const Eigen::MatrixXd& m) {
    const std::size_t n = static_cast<std::size_t>(m.rows());
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> out;
    int counter = 0;

    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w = 0; w < n; ++w) {
            if (!(m(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) > 0.0)) continue;
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::size_t> comp;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            out.push_back(std::move(comp));
        }
    };
    for (std::size_t v = 0; v < n; ++v) {
        if (index[v] < 0) visit(v);
    }
    return out;
}

bool is_closed(const Eigen::MatrixXd& m, const std::vector<std::size_t>& comp) {
    std::vector<bool> inside(static_cast<std::size_t>(m.rows()), false);
    for (std::size_t v : comp) inside[v] = true;
    for (std::size_t v : comp) {
        for (Eigen::Index w = 0; w < m.cols(); ++w) {
            if (m(static_cast<Eigen::Index>(v), w) > 0.0 && !inside[static_cast<std::size_t>(w)]) return false;
        }
    }
    return true;
}

double l1_residual(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) {
    return (m.transpose() * v - v).lpNorm<1>();
}

// Stationary vector of an irreducible stochastic block.
Eigen::VectorXd class_stationary(const Eigen::MatrixXd& block) {
    const Eigen::Index n = block.rows();
    if (n == 1) return Eigen::VectorXd::Ones(1);

    Eigen::EigenSolver<Eigen::MatrixXd> es(block.transpose());
    Eigen::Index best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double gap = std::abs(es.eigenvalues()(k) - std::complex<double>(1.0, 0.0));
        if (gap < best_gap) {
            best_gap = gap;
            best = k;
        }
    }
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    const double s = v.sum();
    bool ok = std::isfinite(s) && std::abs(s) > 0.0;
    if (ok) {
        v /= s;
        ok = v.minCoeff() > -1e-12 && l1_residual(block, v.cwiseMax(0.0) / v.cwiseMax(0.0).sum()) <= 1e-13;
    }
    if (ok) {
        v = v.cwiseMax(0.0);
        return v / v.sum();
    }

    // Power iteration on the lazy chain, which has the same invariant vector and no periodicity.
    Eigen::MatrixXd lazy = 0.5 * (block + Eigen::MatrixXd::Identity(n, n));
    v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < 2'000'000; ++it) {
        Eigen::VectorXd next = lazy.transpose() * v;
        next /= next.sum();
        const double change = (next - v).lpNorm<1>();
        v = next;
        if (change < 1e-16 && l1_residual(block, v) <= 1e-13) break;
    }
    return v;
}

}  // namespace

double invariance_residual(const StochasticChannel& channel, const Distribution& gamma) {
    if (!channel.is_square()) throw Error(ErrorCode::NotSquare, "channel is not square");
    if (!(gamma.alphabet() == channel.inputs())) {
        throw Error(ErrorCode::AlphabetMismatch, "gamma alphabet differs from channel alphabet");
    }
    return l1_residual(channel.matrix(), gamma.vector());
}

SteadyState steady_state(const StochasticChannel& channel, const std::optional<Distribution>& seed_dist,
                         double tol_fix) {
    if (!channel.is_square()) {
        throw Error(ErrorCode::NotSquare, "steady state needs input alphabet == output alphabet");
    }
    const Eigen::MatrixXd& m = channel.matrix();
    const std::size_t n = channel.inputs().size();
    const auto& alphabet = channel.inputs();

    std::vector<std::vector<std::size_t>> recurrent;
    for (auto& comp : strongly_connected_components(m)) {
        if (is_closed(m, comp)) recurrent.push_back(std::move(comp));
    }
    std::sort(recurrent.begin(), recurrent.end());

    auto stationary_of = [&](const std::vector<std::size_t>& cls) {
        const auto k = static_cast<Eigen::Index>(cls.size());
        Eigen::MatrixXd block(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b)
                block(a, b) = m(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(a)]),
                                static_cast<Eigen::Index>(cls[static_cast<std::size_t>(b)]));
        // Rows of a closed class are stochastic up to rounding.
        for (Eigen::Index a = 0; a < k; ++a) block.row(a) /= block.row(a).sum();
        Eigen::VectorXd pi = class_stationary(block);
        Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (Eigen::Index a = 0; a < k; ++a) full(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(a)])) = pi(a);
        return full;
    };

    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    const bool unique = recurrent.size() == 1;
    if (unique) {
        gamma = stationary_of(recurrent.front());
    } else if (!seed_dist) {
        std::size_t best_class = 0;
        const std::string* best_label = nullptr;
        for (std::size_t c = 0; c < recurrent.size(); ++c) {
            for (std::size_t v : recurrent[c]) {
                if (best_label == nullptr || alphabet.label(v) < *best_label) {
                    best_label = &alphabet.label(v);
                    best_class = c;
                }
            }
        }
        gamma = stationary_of(recurrent[best_class]);
    } else {
        if (!(seed_dist->alphabet() == alphabet)) {
            throw Error(ErrorCode::AlphabetMismatch, "seed distribution alphabet differs from channel");
        }
        // Split the seed among recurrent classes by absorption probability.
        std::vector<int> class_of(n, -1);
        for (std::size_t c = 0; c < recurrent.size(); ++c)
            for (std::size_t v : recurrent[c]) class_of[v] = static_cast<int>(c);
        std::vector<std::size_t> transient;
        for (std::size_t v = 0; v < n; ++v)
            if (class_of[v] < 0) transient.push_back(v);

        const auto t = static_cast<Eigen::Index>(transient.size());
        Eigen::MatrixXd absorb = Eigen::MatrixXd::Zero(t, static_cast<Eigen::Index>(recurrent.size()));
        if (t > 0) {
            Eigen::MatrixXd i_minus_q = Eigen::MatrixXd::Identity(t, t);
            Eigen::MatrixXd r = Eigen::MatrixXd::Zero(t, static_cast<Eigen::Index>(recurrent.size()));
            for (Eigen::Index a = 0; a < t; ++a) {
                const auto va = static_cast<Eigen::Index>(transient[static_cast<std::size_t>(a)]);
                for (Eigen::Index b = 0; b < t; ++b)
                    i_minus_q(a, b) -= m(va, static_cast<Eigen::Index>(transient[static_cast<std::size_t>(b)]));
                for (std::size_t w = 0; w < n; ++w)
                    if (class_of[w] >= 0) r(a, class_of[w]) += m(va, static_cast<Eigen::Index>(w));
            }
            absorb = i_minus_q.fullPivLu().solve(r);
        }
        for (std::size_t c = 0; c < recurrent.size(); ++c) {
            double weight = 0.0;
            for (std::size_t v : recurrent[c]) weight += (*seed_dist)[v];
            for (Eigen::Index a = 0; a < t; ++a)
                weight += (*seed_dist)[transient[static_cast<std::size_t>(a)]] * absorb(a, static_cast<Eigen::Index>(c));
            if (weight > 0.0) gamma += weight * stationary_of(recurrent[c]);
        }
        gamma = gamma.cwiseMax(0.0);
        gamma /= gamma.sum();
    }

    std::vector<double> mass(gamma.data(), gamma.data() + gamma.size());
    SteadyState out;
    out.gamma = validate_distribution(alphabet, std::move(mass), 1e-9);
    out.unique = unique;
    out.residual = l1_residual(m, out.gamma.vector());
    out.recurrent_classes = std::move(recurrent);
    if (!(out.residual <= tol_fix)) {
        throw Error(ErrorCode::NotInvariant,
                    "steady-state solve left residual " + std::to_string(out.residual));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reversal

StochasticChannel bayes_reverse_channel(const StochasticChannel& channel, const Distribution& gamma,
                                        double tol_fix) {
    const double residual = invariance_residual(channel, gamma);
    if (!(residual <= tol_fix)) {
        throw Error(ErrorCode::NotInvariant, "gamma is not invariant (residual " +
                                                 std::to_string(residual) + ")");
    }
    const auto keep = gamma.support();
    if (keep.empty()) throw Error(ErrorCode::EmptySupport, "gamma has empty support");

    const auto k = static_cast<Eigen::Index>(keep.size());
    const Eigen::MatrixXd& phi = channel.matrix();
    // Joint gamma(x) phi(y|x) on the support; its column sums equal gamma(y) by invariance,
    // so dividing by them keeps every row of the result exactly normalized.
    Eigen::MatrixXd joint(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            joint(a, b) = gamma[keep[static_cast<std::size_t>(a)]] *
                          phi(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(a)]),
                              static_cast<Eigen::Index>(keep[static_cast<std::size_t>(b)]));

    Eigen::MatrixXd reverse(k, k);  // rows y, columns x
    for (Eigen::Index b = 0; b < k; ++b) {
        const double gy = joint.col(b).sum();
        if (!(gy > 0.0)) {
            throw Error(ErrorCode::NotInvariant, "support label '" +
                                                     channel.inputs().label(keep[static_cast<std::size_t>(b)]) +
                                                     "' is unreachable under gamma");
        }
        for (Eigen::Index a = 0; a < k; ++a) reverse(b, a) = joint(a, b) / gy;
    }
    auto alphabet = channel.inputs().subset(keep);
    return StochasticChannel::make(alphabet, alphabet, std::move(reverse));
}

// ---------------------------------------------------------------------------
// Joint processes

JointProcess JointProcess::make(Alphabet xs, Alphabet ys, Eigen::MatrixXd table, Direction direction,
                                double tol_norm) {
    if (static_cast<std::size_t>(table.rows()) != xs.size() ||
        static_cast<std::size_t>(table.cols()) != ys.size()) {
        throw Error(ErrorCode::DimensionMismatch, "joint table shape does not match alphabets");
    }
    if (!table.allFinite()) throw Error(ErrorCode::InvalidArgument, "joint table has non-finite entries");
    if (table.size() > 0 && table.minCoeff() < 0.0) {
        throw Error(ErrorCode::NegativeMass, "joint table has a negative entry");
    }
    const double total = table.sum();
    if (std::abs(total - 1.0) > tol_norm) {
        throw Error(ErrorCode::NotNormalized, "joint table sums to " + std::to_string(total));
    }
    return JointProcess(std::move(xs), std::move(ys), std::move(table), direction);
}

double JointProcess::mass(const std::string& x, const std::string& y) const {
    auto i = xs_.find(x);
    auto j = ys_.find(y);
    if (!i || !j) return 0.0;
    return table_(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j));
}

Distribution JointProcess::marginal_x() const {
    Eigen::VectorXd v = table_.rowwise().sum();
    return validate_distribution(xs_, std::vector<double>(v.data(), v.data() + v.size()), 1e-9);
}

Distribution JointProcess::marginal_y() const {
    Eigen::VectorXd v = table_.colwise().sum().transpose();
    return validate_distribution(ys_, std::vector<double>(v.data(), v.data() + v.size()), 1e-9);
}

JointProcess jeffrey_update(const StochasticChannel& conditional, const Distribution& soft_evidence) {
    if (!(soft_evidence.alphabet() == conditional.inputs())) {
        throw Error(ErrorCode::AlphabetMismatch, "soft evidence alphabet differs from conditioning alphabet");
    }
    // conditional(y, x) = P(x|y); the joint is indexed (x, y).
    Eigen::MatrixXd table = conditional.matrix().transpose();
    for (Eigen::Index y = 0; y < table.cols(); ++y) table.col(y) *= soft_evidence[static_cast<std::size_t>(y)];
    return JointProcess::make(conditional.outputs(), conditional.inputs(), std::move(table),
                              Direction::reverse, 1e-10);
}

JointProcess forward_process(const Distribution& prior, const StochasticChannel& channel) {
    if (!(prior.alphabet() == channel.inputs())) {
        throw Error(ErrorCode::AlphabetMismatch, "prior alphabet differs from channel inputs");
    }
    Eigen::MatrixXd table = channel.matrix();
    for (Eigen::Index x = 0; x < table.rows(); ++x) table.row(x) *= prior[static_cast<std::size_t>(x)];
    return JointProcess::make(channel.inputs(), channel.outputs(), std::move(table), Direction::forward,
                              1e-10);
}

JointProcess reverse_process(const Distribution& prior, const StochasticChannel& reverse_channel) {
    if (prior.alphabet() == reverse_channel.inputs()) return jeffrey_update(reverse_channel, prior);

    const auto& inputs = reverse_channel.inputs();
    for (const auto& label : inputs.labels()) {
        if (!prior.alphabet().find(label)) {
            throw Error(ErrorCode::AlphabetMismatch, "prior has no label '" + label + "'");
        }
    }
    std::vector<double> restricted;
    restricted.reserve(inputs.size());
    for (std::size_t i = 0; i < prior.size(); ++i) {
        const auto& label = prior.alphabet().label(i);
        if (!inputs.find(label) && prior[i] > 0.0) {
            throw Error(ErrorCode::PriorOutsideSupport,
                        "prior puts mass on '" + label + "' outside the reference support");
        }
    }
    for (const auto& label : inputs.labels()) restricted.push_back(prior.at(label));
    return jeffrey_update(reverse_channel, validate_distribution(inputs, std::move(restricted)));
}

// ---------------------------------------------------------------------------
// Ratios

RatioTable forward_reverse_ratio(const JointProcess& pf, const JointProcess& pr, SupportPolicy policy) {
    RatioTable out;
    out.xs = pf.xs();
    out.ys = pf.ys();

    for (std::size_t i = 0; i < pf.xs().size(); ++i) {
        for (std::size_t j = 0; j < pf.ys().size(); ++j) {
            const double f = pf(i, j);
            if (!(f > 0.0)) continue;
            const double r = pr.mass(pf.xs().label(i), pf.ys().label(j));
            if (r > 0.0) {
                out.pairs.push_back({i, j});
                out.values.push_back(f / r);
            } else if (policy == SupportPolicy::strict) {
                throw Error(ErrorCode::SupportMismatch, "P_F > 0 but P_R = 0 at (" + pf.xs().label(i) +
                                                            ", " + pf.ys().label(j) + ")");
            } else {
                out.dropped_forward_mass += f;
            }
        }
    }
    for (std::size_t i = 0; i < pr.xs().size(); ++i) {
        for (std::size_t j = 0; j < pr.ys().size(); ++j) {
            const double r = pr(i, j);
            if (!(r > 0.0)) continue;
            if (pf.mass(pr.xs().label(i), pr.ys().label(j)) > 0.0) continue;
            if (policy == SupportPolicy::strict) {
                throw Error(ErrorCode::SupportMismatch, "P_R > 0 but P_F = 0 at (" + pr.xs().label(i) +
                                                            ", " + pr.ys().label(j) + ")");
            }
            out.dropped_reverse_mass += r;
        }
    }
    return out;
}

std::vector<double> bayes_ratio_closed_form(const RatioTable& ratios, const Distribution& p,
                                            const Distribution& q, const Distribution& gamma) {
    std::vector<double> out;
    out.reserve(ratios.size());
    for (const auto& pair : ratios.pairs) {
        const auto& x = ratios.xs.label(pair.x);
        const auto& y = ratios.ys.label(pair.y);
        out.push_back(p.at(x) * gamma.at(y) / (q.at(y) * gamma.at(x)));
    }
    return out;
}

std::vector<double> joint_mass_on(const JointProcess& joint, const PairTable& table) {
    std::vector<double> out;
    out.reserve(table.size());
    const bool aligned = joint.xs() == table.xs && joint.ys() == table.ys;
    for (const auto& pair : table.pairs) {
        out.push_back(aligned ? joint(pair.x, pair.y)
                              : joint.mass(table.xs.label(pair.x), table.ys.label(pair.y)));
    }
    return out;
}

}  // namespace retro
