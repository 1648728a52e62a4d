#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "retro/error.hpp"

namespace retro {

/// Ordered list of distinct state labels.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> labels);

    /// Labels "0", "1", ..., "n-1".
    static Alphabet indexed(std::size_t n);

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }
    std::optional<std::size_t> find(const std::string& label) const;
    std::size_t index_of(const std::string& label) const;

    /// Sub-alphabet keeping the given positions, in order.
    Alphabet subset(std::span<const std::size_t> keep) const;

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.labels_ == b.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Probability vector over a finite alphabet. Always nonnegative and normalized.
class Distribution {
public:
    Distribution() = default;

    const Alphabet& alphabet() const { return alphabet_; }
    std::size_t size() const { return mass_.size(); }
    double operator[](std::size_t i) const { return mass_[i]; }
    double at(const std::string& label) const { return mass_[alphabet_.index_of(label)]; }
    const std::vector<double>& mass() const { return mass_; }
    Eigen::VectorXd vector() const;

    /// Positions with strictly positive mass.
    std::vector<std::size_t> support() const;

private:
    Distribution(Alphabet alphabet, std::vector<double> mass)
        : alphabet_(std::move(alphabet)), mass_(std::move(mass)) {}

    friend Distribution validate_distribution(Alphabet, std::vector<double>, double);

    Alphabet alphabet_;
    std::vector<double> mass_;
};

/// Checks nonnegativity and normalization. A sum within `tol_norm` of one is
/// renormalized exactly; anything further off is rejected.
Distribution validate_distribution(Alphabet alphabet, std::vector<double> mass,
                                   double tol_norm = kTolNorm);
Distribution validate_distribution(std::vector<double> mass, double tol_norm = kTolNorm);

Distribution uniform_distribution(const Alphabet& alphabet);
Distribution point_mass(const Alphabet& alphabet, std::size_t at);

/// Drops zero-mass labels.
Distribution restrict_to_support(const Distribution& d);

/// Conditional probability table phi(output | input); one normalized row per input.
class StochasticChannel {
public:
    StochasticChannel() = default;

    /// `table(i, j)` is the probability of output j given input i.
    static StochasticChannel make(Alphabet inputs, Alphabet outputs, Eigen::MatrixXd table,
                                  double tol_norm = kTolNorm);
    static StochasticChannel make(Eigen::MatrixXd table, double tol_norm = kTolNorm);

    const Alphabet& inputs() const { return inputs_; }
    const Alphabet& outputs() const { return outputs_; }
    const Eigen::MatrixXd& matrix() const { return table_; }

    /// phi(output | input), by position.
    double operator()(std::size_t input, std::size_t output) const { return table_(input, output); }

    bool is_square() const { return inputs_ == outputs_; }

    /// Distribution of outputs after feeding `prior` through the channel.
    Distribution propagate(const Distribution& prior) const;

private:
    StochasticChannel(Alphabet inputs, Alphabet outputs, Eigen::MatrixXd table)
        : inputs_(std::move(inputs)), outputs_(std::move(outputs)), table_(std::move(table)) {}

    Alphabet inputs_;
    Alphabet outputs_;
    Eigen::MatrixXd table_;
};

struct SteadyState {
    Distribution gamma;
    bool unique = false;
    /// L1 norm of gamma*phi - gamma.
    double residual = 0.0;
    /// Closed communicating classes of the positivity digraph, as sorted positions.
    std::vector<std::vector<std::size_t>> recurrent_classes;
};

double invariance_residual(const StochasticChannel& channel, const Distribution& gamma);

/// Invariant distribution of a square channel.
///
/// Uniqueness is decided by counting the closed strongly connected components
/// of the digraph with an edge x -> y whenever phi(y|x) > 0. When there are
/// several, `seed_dist` selects the limit of its Cesaro averages; without a
/// seed the class holding the lexicographically smallest recurrent label wins.
SteadyState steady_state(const StochasticChannel& channel,
                         const std::optional<Distribution>& seed_dist = std::nullopt,
                         double tol_fix = kTolFix);

/// Bayesian inverse of `channel` against the invariant reference `gamma`:
/// gamma(y) phihat(x|y) = gamma(x) phi(y|x), computed on supp(gamma) only.
/// The returned channel maps outputs back to inputs over the restricted alphabets.
StochasticChannel bayes_reverse_channel(const StochasticChannel& channel, const Distribution& gamma,
                                        double tol_fix = kTolFix);

enum class Direction { forward, reverse };

/// Joint table over (x, y). Rows are indexed by x, columns by y.
class JointProcess {
public:
    JointProcess() = default;
    static JointProcess make(Alphabet xs, Alphabet ys, Eigen::MatrixXd table, Direction direction,
                             double tol_norm = kTolNorm);

    const Alphabet& xs() const { return xs_; }
    const Alphabet& ys() const { return ys_; }
    const Eigen::MatrixXd& matrix() const { return table_; }
    Direction direction() const { return direction_; }

    double operator()(std::size_t x, std::size_t y) const { return table_(x, y); }
    /// Mass at (x, y) by label; labels absent from this table carry zero mass.
    double mass(const std::string& x, const std::string& y) const;

    Distribution marginal_x() const;
    Distribution marginal_y() const;

private:
    JointProcess(Alphabet xs, Alphabet ys, Eigen::MatrixXd table, Direction direction)
        : xs_(std::move(xs)), ys_(std::move(ys)), table_(std::move(table)), direction_(direction) {}

    Alphabet xs_;
    Alphabet ys_;
    Eigen::MatrixXd table_;
    Direction direction_ = Direction::forward;
};

/// Jeffrey's rule: P'(x, y) = P(x|y) P'(y). `conditional` maps y to x.
/// The result is tagged reverse, since it carries evidence on y back onto x.
JointProcess jeffrey_update(const StochasticChannel& conditional, const Distribution& soft_evidence);

/// P_F(x, y) = p(x) phi(y|x).
JointProcess forward_process(const Distribution& prior, const StochasticChannel& channel);

/// P_R(x, y) = q(y) phihat(x|y). `prior` may live on a larger alphabet than the
/// reverse channel's inputs as long as it puts no mass outside them.
JointProcess reverse_process(const Distribution& prior, const StochasticChannel& reverse_channel);

struct PairIndex {
    std::size_t x = 0;
    std::size_t y = 0;
    friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

/// Real values attached to (x, y) pairs; positions refer to `xs` and `ys`.
struct PairTable {
    Alphabet xs;
    Alphabet ys;
    std::vector<PairIndex> pairs;
    std::vector<double> values;

    std::size_t size() const { return pairs.size(); }
};

/// r(x, y) = P_F / P_R on the pairs where both are positive.
struct RatioTable : PairTable {
    /// Forward mass on pairs where P_R = 0 (nonzero only under SupportPolicy::common).
    double dropped_forward_mass = 0.0;
    /// Reverse mass on pairs where P_F = 0 (nonzero only under SupportPolicy::common).
    double dropped_reverse_mass = 0.0;
};

enum class SupportPolicy {
    /// One-sided support is an error.
    strict,
    /// One-sided pairs are dropped and their mass tallied.
    common,
};

/// Pairs are aligned by label; positions in the result refer to `pf`'s alphabets.
RatioTable forward_reverse_ratio(const JointProcess& pf, const JointProcess& pr,
                                 SupportPolicy policy = SupportPolicy::strict);

/// p(x) gamma(y) / (q(y) gamma(x)) on every pair of `ratios`.
std::vector<double> bayes_ratio_closed_form(const RatioTable& ratios, const Distribution& p,
                                            const Distribution& q, const Distribution& gamma);

/// Mass of `joint` at each pair of `table`, matched by label.
std::vector<double> joint_mass_on(const JointProcess& joint, const PairTable& table);

}  // namespace retro
