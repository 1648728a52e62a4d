#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "retro/prob_core.hpp"

namespace retro {

enum class FKind { log, power, exp, custom };

/// An invertible f on the positive reals together with f^-1, g and g', where
/// g is the map sending f(r) to f(1/r).
///
///   log(z):   f = ln(r)/z,  f^-1(w) = e^{zw},     g(w) = -w
///   power(a): f = r^a,      f^-1(w) = w^{1/a},    g(w) = 1/w
///   exp(k):   f = e^{kr},   f^-1(w) = ln(w)/k,    g(w) = e^{k^2/ln w}
///
/// Evaluations outside the domain (or with a non-finite result) throw DomainError.
class FFamily {
public:
    using Fn = std::function<double(double)>;

    static FFamily log(double z);
    static FFamily power(double alpha);
    static FFamily exp(double kappa);
    /// Validated numerically; throws NonInvertibleCustom if f is not strictly
    /// monotone on a log-spaced grid over [1e-6, 1e6] or the companions disagree.
    static FFamily custom(std::string name, Fn f, Fn f_inverse, Fn g, Fn g_prime);

    FKind kind() const { return kind_; }
    double parameter() const { return parameter_; }
    /// Canonical text form, e.g. "log:1" or "power:0.5".
    const std::string& name() const { return name_; }

    double f(double r) const;
    double f_inverse(double w) const;
    double g(double w) const;
    double g_prime(double w) const;

private:
    FFamily(FKind kind, double parameter, std::string name, Fn f, Fn f_inverse, Fn g, Fn g_prime)
        : kind_(kind), parameter_(parameter), name_(std::move(name)), f_(std::move(f)),
          f_inverse_(std::move(f_inverse)), g_(std::move(g)), g_prime_(std::move(g_prime)) {}

    FKind kind_ = FKind::log;
    double parameter_ = 1.0;
    std::string name_;
    Fn f_, f_inverse_, g_, g_prime_;
};

FFamily make_f_family(FKind kind, double parameter);

/// Parses the canonical name produced by FFamily::name().
FFamily parse_f_family(const std::string& name);

/// Log-spaced grid of `n` points over [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct OmegaTable {
    /// omega_F = f(r) per support pair.
    PairTable forward;
    /// omega_R = g(omega_F) per support pair.
    PairTable reverse;
    /// max |g(omega_F) - f(1/r)|, relative to max(1, |f(1/r)|).
    double max_consistency_residual = 0.0;
};

OmegaTable omega_variables(const RatioTable& ratios, const FFamily& family);

struct Atom {
    double value = 0.0;
    double weight = 0.0;
};

/// Finitely supported measure with atoms sorted by value.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    DiscreteMeasure(std::vector<Atom> atoms, double merge_tol)
        : atoms_(std::move(atoms)), merge_tol_(merge_tol) {}

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    double merge_tol() const { return merge_tol_; }
    double total_weight() const;

    /// Closest atom within `tol` of `value`, if any.
    const Atom* find(double value, double tol) const;

private:
    std::vector<Atom> atoms_;
    double merge_tol_ = kMergeTol;
};

/// Push-forward of `joint` through the per-pair values; values closer than
/// `merge_tol` are merged by single linkage on the sorted list, each atom sitting
/// at the mass-weighted mean of its members.
DiscreteMeasure measure_of(const JointProcess& joint, const PairTable& values, double merge_tol = kMergeTol);

struct CrooksRow {
    double omega = 0.0;
    double forward_weight = 0.0;
    /// g(omega); NaN for unmatched reverse atoms.
    double target = 0.0;
    double reverse_weight = 0.0;
    /// f^-1(g(omega)) * forward_weight.
    double predicted = 0.0;
    double residual = 0.0;
};

struct CrooksReport {
    std::vector<CrooksRow> rows;
    double max_residual = 0.0;
};

/// Checks the atom-weight relation w_R(g(w)) = f^-1(g(w)) w_F(w). For point
/// masses the density Jacobian |g'| cancels. Reverse atoms that no forward atom
/// maps onto are reported with their full weight as residual.
CrooksReport crooks_residuals(const DiscreteMeasure& mu_f, const DiscreteMeasure& mu_r, const FFamily& family);
CrooksReport crooks_residuals(const DiscreteMeasure& mu_f, const DiscreteMeasure& mu_r, const FFamily& family,
                              double match_tol);

/// <f^-1(g(omega))>_F.
double jarzynski_average(const JointProcess& pf, const PairTable& omega_f, const FFamily& family);

/// D_f(P_F || P_R) = sum P_F f(P_F / P_R). Returns +infinity when P_F > 0 on a
/// pair with P_R = 0.
double f_divergence(const JointProcess& pf, const JointProcess& pr, const std::function<double(double)>& f);
double f_divergence(const JointProcess& pf, const JointProcess& pr, const FFamily& family);

inline bool divergence_infinite(double d) { return d == std::numeric_limits<double>::infinity(); }

}  // namespace retro
