#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "retro/prob_core.hpp"

namespace retro {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

namespace linalg {

CMatrix dagger(const CMatrix& a);
/// max |A - A^dagger| over entries.
double hermiticity_defect(const CMatrix& a);
double max_abs(const CMatrix& a);
double min_eigenvalue(const CMatrix& hermitian);

/// f(A) through the Hermitian eigendecomposition. Eigenvalues at or below
/// rel_cutoff * (largest eigenvalue) count as zero and map to zero.
template <typename Fn>
CMatrix psd_function(const CMatrix& a, Fn fn, double rel_cutoff = 1e-12) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()));
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double top = ev.size() > 0 ? std::max(ev.maxCoeff(), 0.0) : 0.0;
    Eigen::VectorXd mapped(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) mapped(i) = ev(i) > rel_cutoff * top && ev(i) > 0.0 ? fn(ev(i)) : 0.0;
    return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix sqrt_psd(const CMatrix& a);
/// Pseudo-inverse square root: inverts on the support only.
CMatrix inverse_sqrt_psd(const CMatrix& a);
CMatrix support_projector(const CMatrix& a);

}  // namespace linalg

class HermitianOperator {
public:
    HermitianOperator() = default;
    static HermitianOperator make(const CMatrix& a, double tol = 1e-12);

    const CMatrix& matrix() const { return m_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

private:
    explicit HermitianOperator(CMatrix m) : m_(std::move(m)) {}
    CMatrix m_;
};

/// Unit-trace PSD operator. Eigenvalues in [-1e-12, 0) are clipped on construction.
class DensityMatrix {
public:
    DensityMatrix() = default;
    static DensityMatrix make(const CMatrix& rho, double tol = 1e-12);
    static DensityMatrix pure(const Eigen::VectorXcd& psi);
    /// |k><k| in dimension d.
    static DensityMatrix basis_state(std::size_t d, std::size_t k);
    static DensityMatrix maximally_mixed(std::size_t d);

    const CMatrix& matrix() const { return op_.matrix(); }
    std::size_t dim() const { return op_.dim(); }

private:
    explicit DensityMatrix(HermitianOperator op) : op_(std::move(op)) {}
    HermitianOperator op_;
};

class Povm {
public:
    Povm() = default;
    /// Elements must be PSD within `tol_psd` and sum to `completeness` (identity
    /// when omitted) within `tol_sum`.
    static Povm make(std::vector<CMatrix> elements, const std::optional<CMatrix>& completeness = std::nullopt,
                     double tol_psd = 1e-12, double tol_sum = 1e-10);
    /// Rank-one projectors on the columns of a unitary.
    static Povm projective(const CMatrix& basis);

    const std::vector<HermitianOperator>& elements() const { return elements_; }
    const CMatrix& element(std::size_t k) const { return elements_.at(k).matrix(); }
    std::size_t size() const { return elements_.size(); }
    std::size_t dim() const { return elements_.empty() ? 0 : elements_.front().dim(); }

private:
    explicit Povm(std::vector<HermitianOperator> e) : elements_(std::move(e)) {}
    std::vector<HermitianOperator> elements_;
};

/// Completely positive map X -> sum_k K_k X K_k^dagger, not necessarily trace preserving.
class KrausMap {
public:
    KrausMap() = default;
    explicit KrausMap(std::vector<CMatrix> operators);

    const std::vector<CMatrix>& operators() const { return ops_; }
    std::size_t input_dim() const { return static_cast<std::size_t>(ops_.front().cols()); }
    std::size_t output_dim() const { return static_cast<std::size_t>(ops_.front().rows()); }

    CMatrix apply(const CMatrix& x) const;
    /// Trace dual X -> sum_k K_k^dagger X K_k.
    KrausMap adjoint() const;
    /// sum_k K_k^dagger K_k; the identity for trace-preserving maps.
    CMatrix trace_operator() const;

    /// J[(i, a), (j, b)] = E(|i><j|)[a, b], row index i * d_out + a.
    CMatrix choi() const;
    /// Kraus form of a Choi matrix. Eigenvalues in [-clip_tol, 0] are dropped;
    /// anything more negative throws NotCPTP.
    static KrausMap from_choi(const CMatrix& choi, std::size_t input_dim, std::size_t output_dim,
                              double clip_tol = 1e-10);

private:
    std::vector<CMatrix> ops_;
};

/// Kraus map validated as CPTP.
class KrausChannel {
public:
    KrausChannel() = default;
    static KrausChannel make(std::vector<CMatrix> operators, double tol = 1e-10);

    static KrausChannel identity(std::size_t d);
    static KrausChannel unitary(const CMatrix& u);
    /// Qubit amplitude damping: |1> decays to |0> with probability eta.
    static KrausChannel amplitude_damping(double eta);
    /// rho -> (1 - p) rho + p Tr[rho] I / d.
    static KrausChannel depolarizing(std::size_t d, double p);

    const KrausMap& map() const { return map_; }
    const std::vector<CMatrix>& operators() const { return map_.operators(); }
    std::size_t input_dim() const { return map_.input_dim(); }
    std::size_t output_dim() const { return map_.output_dim(); }
    CMatrix apply(const CMatrix& x) const { return map_.apply(x); }

private:
    explicit KrausChannel(KrausMap m) : map_(std::move(m)) {}
    KrausMap map_;
};

DensityMatrix apply_channel(const KrausChannel& channel, const DensityMatrix& rho);
KrausMap adjoint_channel(const KrausChannel& channel);

/// Preparations, channel and measurement with an invariant weighting gamma on
/// the common label set. gamma0 = sum_x gamma(x) rho_x.
class QuantumProcess {
public:
    /// Without `gamma` the steady state of the induced transition is used, and a
    /// non-unique one throws NonUniqueSteadyState.
    static QuantumProcess make(std::vector<DensityMatrix> preparations, KrausChannel channel, Povm measurement,
                               std::optional<Distribution> gamma = std::nullopt, double tol_fix = kTolFix);

    const Alphabet& labels() const { return gamma_.alphabet(); }
    const std::vector<DensityMatrix>& preparations() const { return preparations_; }
    const KrausChannel& channel() const { return channel_; }
    const Povm& measurement() const { return measurement_; }
    const Distribution& gamma() const { return gamma_; }
    const CMatrix& gamma0() const { return gamma0_; }

private:
    QuantumProcess() = default;
    std::vector<DensityMatrix> preparations_;
    KrausChannel channel_;
    Povm measurement_;
    Distribution gamma_;
    CMatrix gamma0_;
};

/// phi(y|x) = Tr[Pi_y E(rho_x)] over indexed alphabets.
StochasticChannel induced_transition(const std::vector<DensityMatrix>& preparations, const KrausChannel& channel,
                                     const Povm& measurement);
StochasticChannel induced_transition(const QuantumProcess& qp);

struct PetzMap {
    KrausMap map;
    /// Projector onto supp E(gamma0); the map is trace preserving there.
    CMatrix input_support;
    double choi_min_eigenvalue = 0.0;
    /// max |sum R^dagger R - input_support|.
    double trace_residual = 0.0;
    /// max |Ehat(E(gamma0)) - gamma0|.
    double fixed_point_residual = 0.0;

    CMatrix apply(const CMatrix& x) const { return map.apply(x); }
};

/// Ehat(X) = sqrt(g0) E^dagger[E(g0)^{-1/2} X E(g0)^{-1/2}] sqrt(g0), with inverses
/// taken on supports. Built as a Choi matrix and factored back into Kraus form.
PetzMap petz_reverse(const KrausChannel& channel, const CMatrix& gamma0);

/// Theta_x = gamma(x) g0^{-1/2} rho_x g0^{-1/2}; sums to the support projector of g0.
Povm retrodictive_povm(const QuantumProcess& qp);

struct RetrodictiveStates {
    /// Outcome labels kept (gamma(y) > 0).
    Alphabet outcomes;
    std::vector<DensityMatrix> states;
    std::vector<double> outcome_weights;
};

/// sigma_y = sqrt(E(g0)) Pi_y sqrt(E(g0)) / gamma(y). Outcomes with gamma(y) = 0
/// throw ZeroOutcomeWeight unless `drop_zero_outcomes` is set.
RetrodictiveStates retrodictive_states(const QuantumProcess& qp, bool drop_zero_outcomes = false);

/// phihat(x|y) = Tr[Theta_x Ehat(sigma_y)] on supp(gamma).
StochasticChannel quantum_retrodicted_transition(const QuantumProcess& qp);

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre matrix.
CMatrix haar_unitary(std::size_t d, std::uint64_t seed);

/// Ginibre-induced random state of rank min(rank, d).
DensityMatrix random_density_matrix(std::size_t d, std::size_t rank, std::uint64_t seed);
/// Stinespring truncation of a Haar isometry into `kraus_rank` operators.
KrausChannel random_channel(std::size_t d_in, std::size_t d_out, std::size_t kraus_rank, std::uint64_t seed);
/// Full-rank elements normalized by the inverse square root of their sum.
Povm random_povm(std::size_t d, std::size_t outcomes, std::uint64_t seed);

/// SplitMix64 mix of (seed, stream); stable sub-seeds for composite generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace retro
