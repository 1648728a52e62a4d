#include "retro/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace retro {

namespace linalg {

CMatrix dagger(const CMatrix& a) { return a.adjoint(); }

double hermiticity_defect(const CMatrix& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    return a.size() == 0 ? 0.0 : (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double min_eigenvalue(const CMatrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hermitian + hermitian.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

CMatrix sqrt_psd(const CMatrix& a) {
    return psd_function(a, [](double v) { return std::sqrt(v); });
}

CMatrix inverse_sqrt_psd(const CMatrix& a) {
    return psd_function(a, [](double v) { return 1.0 / std::sqrt(v); });
}

CMatrix support_projector(const CMatrix& a) {
    return psd_function(a, [](double) { return 1.0; });
}

}  // namespace linalg

namespace {

void require_square(const CMatrix& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must be a nonempty square matrix");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Operators and states

HermitianOperator HermitianOperator::make(const CMatrix& a, double tol) {
    require_square(a, "Hermitian operator");
    if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, "operator has non-finite entries");
    const double defect = linalg::hermiticity_defect(a);
    if (defect > tol) {
        throw Error(ErrorCode::NotHermitian, "max |A - A^dagger| = " + std::to_string(defect));
    }
    return HermitianOperator(0.5 * (a + a.adjoint()));
}

DensityMatrix DensityMatrix::make(const CMatrix& rho, double tol) {
    auto op = HermitianOperator::make(rho, tol);
    const double trace = op.matrix().trace().real();
    if (std::abs(trace - 1.0) > tol) {
        throw Error(ErrorCode::NotNormalized, "density matrix trace is " + std::to_string(trace));
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix());
    const double lowest = es.eigenvalues().minCoeff();
    if (lowest < -tol) {
        throw Error(ErrorCode::NotPositive, "density matrix eigenvalue " + std::to_string(lowest));
    }
    if (lowest < 0.0) {
        Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
        clipped /= clipped.sum();
        CMatrix m = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
        op = HermitianOperator::make(0.5 * (m + m.adjoint()), tol);
    }
    return DensityMatrix(std::move(op));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero state vector");
    Eigen::VectorXcd v = psi / n;
    return make(v * v.adjoint());
}

DensityMatrix DensityMatrix::basis_state(std::size_t d, std::size_t k) {
    if (k >= d) throw Error(ErrorCode::DimensionMismatch, "basis index out of range");
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
    return make(m);
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return make(CMatrix::Identity(n, n) / static_cast<double>(d));
}

Povm Povm::make(std::vector<CMatrix> elements, const std::optional<CMatrix>& completeness, double tol_psd,
                double tol_sum) {
    if (elements.empty()) throw Error(ErrorCode::InvalidArgument, "POVM needs at least one element");
    const auto d = elements.front().rows();
    std::vector<HermitianOperator> out;
    out.reserve(elements.size());
    CMatrix total = CMatrix::Zero(d, d);
    for (std::size_t k = 0; k < elements.size(); ++k) {
        if (elements[k].rows() != d || elements[k].cols() != d) {
            throw Error(ErrorCode::DimensionMismatch, "POVM element " + std::to_string(k) + " has the wrong shape");
        }
        auto op = HermitianOperator::make(elements[k], tol_psd);
        const double lowest = linalg::min_eigenvalue(op.matrix());
        if (lowest < -tol_psd) {
            throw Error(ErrorCode::NotPositive,
                        "POVM element " + std::to_string(k) + " has eigenvalue " + std::to_string(lowest));
        }
        total += op.matrix();
        out.push_back(std::move(op));
    }
    const CMatrix target = completeness ? *completeness : CMatrix(CMatrix::Identity(d, d));
    if (target.rows() != d || target.cols() != d) {
        throw Error(ErrorCode::DimensionMismatch, "POVM completeness target has the wrong shape");
    }
    const double defect = linalg::max_abs(total - target);
    if (defect > tol_sum) {
        throw Error(ErrorCode::NotNormalized, "POVM elements miss completeness by " + std::to_string(defect));
    }
    return Povm(std::move(out));
}

Povm Povm::projective(const CMatrix& basis) {
    require_square(basis, "measurement basis");
    std::vector<CMatrix> elements;
    for (Eigen::Index k = 0; k < basis.cols(); ++k) elements.push_back(basis.col(k) * basis.col(k).adjoint());
    return make(std::move(elements));
}

// ---------------------------------------------------------------------------
// Kraus maps

KrausMap::KrausMap(std::vector<CMatrix> operators) : ops_(std::move(operators)) {
    if (ops_.empty()) throw Error(ErrorCode::InvalidArgument, "Kraus map needs at least one operator");
    for (const auto& k : ops_) {
        if (k.rows() != ops_.front().rows() || k.cols() != ops_.front().cols() || k.size() == 0) {
            throw Error(ErrorCode::DimensionMismatch, "Kraus operators must share one nonempty shape");
        }
    }
}

CMatrix KrausMap::apply(const CMatrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != input_dim() || static_cast<std::size_t>(x.cols()) != input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "operator dimension " + std::to_string(x.rows()) +
                                                      " does not match map input dimension " +
                                                      std::to_string(input_dim()));
    }
    const auto d = static_cast<Eigen::Index>(output_dim());
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& k : ops_) out.noalias() += k * x * k.adjoint();
    return out;
}

KrausMap KrausMap::adjoint() const {
    std::vector<CMatrix> adj;
    adj.reserve(ops_.size());
    for (const auto& k : ops_) adj.push_back(k.adjoint());
    return KrausMap(std::move(adj));
}

CMatrix KrausMap::trace_operator() const {
    const auto d = static_cast<Eigen::Index>(input_dim());
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& k : ops_) out.noalias() += k.adjoint() * k;
    return out;
}

CMatrix KrausMap::choi() const {
    const auto n = static_cast<Eigen::Index>(input_dim() * output_dim());
    CMatrix j = CMatrix::Zero(n, n);
    for (const auto& k : ops_) {
        // Column-major storage puts K(a, i) at i * d_out + a, the Choi row ordering.
        Eigen::Map<const Eigen::VectorXcd> v(k.data(), n);
        j.noalias() += v * v.adjoint();
    }
    return j;
}

KrausMap KrausMap::from_choi(const CMatrix& choi, std::size_t input_dim, std::size_t output_dim, double clip_tol) {
    const auto n = static_cast<Eigen::Index>(input_dim * output_dim);
    if (choi.rows() != n || choi.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "Choi matrix shape does not match dimensions");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (choi + choi.adjoint()));
    const Eigen::VectorXd& ev = es.eigenvalues();
    if (ev.minCoeff() < -clip_tol) {
        throw Error(ErrorCode::NotCPTP, "Choi eigenvalue " + std::to_string(ev.minCoeff()));
    }
    const double drop = std::max(ev.maxCoeff(), 0.0) * 1e-15;
    std::vector<CMatrix> ops;
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        if (!(ev(k) > drop)) continue;
        Eigen::VectorXcd v = std::sqrt(ev(k)) * es.eigenvectors().col(k);
        ops.push_back(Eigen::Map<const CMatrix>(v.data(), static_cast<Eigen::Index>(output_dim),
                                                static_cast<Eigen::Index>(input_dim)));
    }
    if (ops.empty()) {
        ops.push_back(CMatrix::Zero(static_cast<Eigen::Index>(output_dim), static_cast<Eigen::Index>(input_dim)));
    }
    return KrausMap(std::move(ops));
}

KrausChannel KrausChannel::make(std::vector<CMatrix> operators, double tol) {
    KrausMap m(std::move(operators));
    const auto d = static_cast<Eigen::Index>(m.input_dim());
    const double tp = linalg::max_abs(m.trace_operator() - CMatrix::Identity(d, d));
    if (!(tp <= tol)) {
        throw Error(ErrorCode::NotCPTP, "sum K^dagger K misses identity by " + std::to_string(tp));
    }
    // A Kraus form is CP by construction; the Choi check guards against non-finite input.
    if (m.input_dim() * m.output_dim() <= 256) {
        const double lowest = linalg::min_eigenvalue(m.choi());
        if (!(lowest >= -tol)) throw Error(ErrorCode::NotCPTP, "Choi eigenvalue " + std::to_string(lowest));
    }
    return KrausChannel(std::move(m));
}

KrausChannel KrausChannel::identity(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return make({CMatrix::Identity(n, n)});
}

KrausChannel KrausChannel::unitary(const CMatrix& u) {
    require_square(u, "unitary");
    const double defect = linalg::max_abs(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols()));
    if (defect > 1e-10) throw Error(ErrorCode::NotCPTP, "matrix is not unitary (defect " + std::to_string(defect) + ")");
    return make({u});
}

KrausChannel KrausChannel::amplitude_damping(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "damping must lie in [0, 1]");
    CMatrix k0 = CMatrix::Zero(2, 2);
    CMatrix k1 = CMatrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - eta);
    k1(0, 1) = std::sqrt(eta);
    return make({k0, k1});
}

KrausChannel KrausChannel::depolarizing(std::size_t d, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "depolarizing weight must lie in [0, 1]");
    const auto n = static_cast<Eigen::Index>(d);
    std::vector<CMatrix> ops;
    if (p < 1.0) ops.push_back(std::sqrt(1.0 - p) * CMatrix::Identity(n, n));
    const double scale = std::sqrt(p / static_cast<double>(d));
    if (p > 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                CMatrix e = CMatrix::Zero(n, n);
                e(i, j) = scale;
                ops.push_back(std::move(e));
            }
        }
    }
    return make(std::move(ops));
}

DensityMatrix apply_channel(const KrausChannel& channel, const DensityMatrix& rho) {
    return DensityMatrix::make(channel.apply(rho.matrix()), 1e-10);
}

KrausMap adjoint_channel(const KrausChannel& channel) { return channel.map().adjoint(); }

// ---------------------------------------------------------------------------
// Processes

StochasticChannel induced_transition(const std::vector<DensityMatrix>& preparations, const KrausChannel& channel,
                                     const Povm& measurement) {
    if (preparations.empty()) throw Error(ErrorCode::InvalidArgument, "no preparations");
    if (measurement.dim() != channel.output_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "measurement dimension differs from channel output");
    }
    const auto nx = static_cast<Eigen::Index>(preparations.size());
    const auto ny = static_cast<Eigen::Index>(measurement.size());
    Eigen::MatrixXd table(nx, ny);
    for (Eigen::Index x = 0; x < nx; ++x) {
        const CMatrix evolved = channel.apply(preparations[static_cast<std::size_t>(x)].matrix());
        for (Eigen::Index y = 0; y < ny; ++y) {
            double v = (measurement.element(static_cast<std::size_t>(y)) * evolved).trace().real();
            if (v < -1e-12) throw Error(ErrorCode::NotPositive, "negative Born probability " + std::to_string(v));
            table(x, y) = std::max(v, 0.0);
        }
    }
    return StochasticChannel::make(std::move(table));
}

StochasticChannel induced_transition(const QuantumProcess& qp) {
    auto phi = induced_transition(qp.preparations(), qp.channel(), qp.measurement());
    return StochasticChannel::make(qp.labels(), qp.labels(), phi.matrix());
}

QuantumProcess QuantumProcess::make(std::vector<DensityMatrix> preparations, KrausChannel channel, Povm measurement,
                                    std::optional<Distribution> gamma, double tol_fix) {
    if (preparations.size() != measurement.size()) {
        throw Error(ErrorCode::DimensionMismatch, "need as many preparations as measurement outcomes");
    }
    for (const auto& rho : preparations) {
        if (rho.dim() != channel.input_dim()) {
            throw Error(ErrorCode::DimensionMismatch, "preparation dimension differs from channel input");
        }
    }
    auto phi = induced_transition(preparations, channel, measurement);
    QuantumProcess qp;
    if (gamma) {
        if (gamma->size() != preparations.size()) {
            throw Error(ErrorCode::AlphabetMismatch, "gamma size differs from the number of preparations");
        }
        phi = StochasticChannel::make(gamma->alphabet(), gamma->alphabet(), phi.matrix());
        const double residual = invariance_residual(phi, *gamma);
        if (!(residual <= tol_fix)) {
            throw Error(ErrorCode::NotInvariant, "gamma residual " + std::to_string(residual));
        }
        qp.gamma_ = *gamma;
    } else {
        auto ss = steady_state(phi, std::nullopt, tol_fix);
        if (!ss.unique) throw Error(ErrorCode::NonUniqueSteadyState, "induced transition has several steady states");
        qp.gamma_ = ss.gamma;
    }
    const auto d = static_cast<Eigen::Index>(channel.input_dim());
    qp.gamma0_ = CMatrix::Zero(d, d);
    for (std::size_t x = 0; x < preparations.size(); ++x) qp.gamma0_ += qp.gamma_[x] * preparations[x].matrix();
    qp.preparations_ = std::move(preparations);
    qp.channel_ = std::move(channel);
    qp.measurement_ = std::move(measurement);
    return qp;
}

PetzMap petz_reverse(const KrausChannel& channel, const CMatrix& gamma0) {
    require_square(gamma0, "reference state");
    if (static_cast<std::size_t>(gamma0.rows()) != channel.input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "reference state dimension differs from channel input");
    }
    if (linalg::hermiticity_defect(gamma0) > 1e-10 || linalg::min_eigenvalue(gamma0) < -1e-10) {
        throw Error(ErrorCode::SingularReference, "reference state is not PSD");
    }
    const CMatrix evolved = channel.apply(gamma0);
    if (!(gamma0.trace().real() > 0.0) || !(evolved.trace().real() > 0.0)) {
        throw Error(ErrorCode::SingularReference, "reference state vanishes");
    }
    const CMatrix root = linalg::sqrt_psd(gamma0);
    const CMatrix inv_root = linalg::inverse_sqrt_psd(evolved);
    const CMatrix support = linalg::support_projector(evolved);

    std::vector<CMatrix> raw;
    raw.reserve(channel.operators().size());
    for (const auto& k : channel.operators()) raw.push_back(root * k.adjoint() * inv_root);
    const KrausMap direct(std::move(raw));

    // Choi matrix from the action on matrix units, then factored.
    const std::size_t din = channel.output_dim();
    const std::size_t dout = channel.input_dim();
    const auto n = static_cast<Eigen::Index>(din * dout);
    CMatrix choi = CMatrix::Zero(n, n);
    for (std::size_t i = 0; i < din; ++i) {
        for (std::size_t j = 0; j < din; ++j) {
            CMatrix unit = CMatrix::Zero(static_cast<Eigen::Index>(din), static_cast<Eigen::Index>(din));
            unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
            choi.block(static_cast<Eigen::Index>(i * dout), static_cast<Eigen::Index>(j * dout),
                       static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(dout)) = direct.apply(unit);
        }
    }

    PetzMap out;
    out.choi_min_eigenvalue = linalg::min_eigenvalue(choi);
    if (!(out.choi_min_eigenvalue >= -1e-10)) {
        throw Error(ErrorCode::NotCPTP, "Petz Choi eigenvalue " + std::to_string(out.choi_min_eigenvalue));
    }
    out.map = KrausMap::from_choi(choi, din, dout, 1e-10);
    out.input_support = support;
    out.trace_residual = linalg::max_abs(out.map.trace_operator() - support);
    out.fixed_point_residual = linalg::max_abs(out.map.apply(evolved) - gamma0);
    if (!(out.trace_residual <= 1e-10)) {
        throw Error(ErrorCode::NotCPTP, "Petz map trace residual " + std::to_string(out.trace_residual));
    }
    return out;
}

Povm retrodictive_povm(const QuantumProcess& qp) {
    const CMatrix g = linalg::inverse_sqrt_psd(qp.gamma0());
    if (linalg::max_abs(g) == 0.0) throw Error(ErrorCode::SingularReference, "reference state vanishes");
    std::vector<CMatrix> elements;
    elements.reserve(qp.preparations().size());
    for (std::size_t x = 0; x < qp.preparations().size(); ++x) {
        elements.push_back(qp.gamma()[x] * g * qp.preparations()[x].matrix() * g);
    }
    return Povm::make(std::move(elements), linalg::support_projector(qp.gamma0()), 1e-12, 1e-10);
}

RetrodictiveStates retrodictive_states(const QuantumProcess& qp, bool drop_zero_outcomes) {
    const CMatrix evolved = qp.channel().apply(qp.gamma0());
    const CMatrix root = linalg::sqrt_psd(evolved);
    RetrodictiveStates out;
    std::vector<std::size_t> kept;
    for (std::size_t y = 0; y < qp.measurement().size(); ++y) {
        const double weight = (qp.measurement().element(y) * evolved).trace().real();
        if (std::abs(weight - qp.gamma()[y]) > 1e-10) {
            throw Error(ErrorCode::NotInvariant, "outcome '" + qp.labels().label(y) + "' has weight " +
                                                     std::to_string(weight) + " but gamma " +
                                                     std::to_string(qp.gamma()[y]));
        }
        if (!(qp.gamma()[y] > 0.0) || !(weight > 0.0)) {
            if (drop_zero_outcomes) continue;
            throw Error(ErrorCode::ZeroOutcomeWeight, "outcome '" + qp.labels().label(y) + "' has zero weight");
        }
        CMatrix sigma = root * qp.measurement().element(y) * root / weight;
        out.states.push_back(DensityMatrix::make(0.5 * (sigma + sigma.adjoint()), 1e-10));
        out.outcome_weights.push_back(weight);
        kept.push_back(y);
    }
    out.outcomes = qp.labels().subset(kept);
    return out;
}

StochasticChannel quantum_retrodicted_transition(const QuantumProcess& qp) {
    const Povm theta = retrodictive_povm(qp);
    const RetrodictiveStates sigma = retrodictive_states(qp, true);
    const PetzMap reverse = petz_reverse(qp.channel(), qp.gamma0());
    const auto xs = qp.gamma().support();

    Eigen::MatrixXd table(static_cast<Eigen::Index>(sigma.states.size()), static_cast<Eigen::Index>(xs.size()));
    for (std::size_t b = 0; b < sigma.states.size(); ++b) {
        const CMatrix back = reverse.apply(sigma.states[b].matrix());
        for (std::size_t a = 0; a < xs.size(); ++a) {
            const double v = (theta.element(xs[a]) * back).trace().real();
            if (v < -1e-10) throw Error(ErrorCode::NotPositive, "negative retrodicted probability " + std::to_string(v));
            table(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = std::max(v, 0.0);
        }
    }
    return StochasticChannel::make(sigma.outcomes, qp.labels().subset(xs), std::move(table), 1e-9);
}

// ---------------------------------------------------------------------------
// Random instances

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

CMatrix ginibre(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    // Column-major fill order keeps the stream layout fixed.
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(r, c) = Complex(re, im) / std::sqrt(2.0);
        }
    }
    return z;
}

}  // namespace

CMatrix haar_unitary(std::size_t d, std::uint64_t seed) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 1");
    std::mt19937_64 rng(seed);
    const CMatrix z = ginibre(d, d, rng);
    Eigen::HouseholderQR<CMatrix> qr(z);
    const auto n = static_cast<Eigen::Index>(d);
    CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    const CMatrix& r = qr.matrixQR();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex diag = r(k, k);
        const double mag = std::abs(diag);
        q.col(k) *= mag > 0.0 ? diag / mag : Complex(1.0, 0.0);
    }
    return q;
}

DensityMatrix random_density_matrix(std::size_t d, std::size_t rank, std::uint64_t seed) {
    if (d == 0 || rank == 0) throw Error(ErrorCode::InvalidArgument, "dimension and rank must be positive");
    std::mt19937_64 rng(seed);
    const CMatrix g = ginibre(d, std::min(rank, d), rng);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix::make(0.5 * (rho + rho.adjoint()));
}

KrausChannel random_channel(std::size_t d_in, std::size_t d_out, std::size_t kraus_rank, std::uint64_t seed) {
    if (d_in == 0 || d_out == 0 || kraus_rank == 0) {
        throw Error(ErrorCode::InvalidArgument, "dimensions and Kraus rank must be positive");
    }
    if (d_out * kraus_rank < d_in) {
        throw Error(ErrorCode::DimensionMismatch, "d_out * kraus_rank must be at least d_in");
    }
    const CMatrix u = haar_unitary(d_out * kraus_rank, seed);
    std::vector<CMatrix> ops;
    for (std::size_t k = 0; k < kraus_rank; ++k) {
        ops.push_back(u.block(static_cast<Eigen::Index>(k * d_out), 0, static_cast<Eigen::Index>(d_out),
                              static_cast<Eigen::Index>(d_in)));
    }
    return KrausChannel::make(std::move(ops));
}

Povm random_povm(std::size_t d, std::size_t outcomes, std::uint64_t seed) {
    if (d == 0 || outcomes == 0) throw Error(ErrorCode::InvalidArgument, "dimension and outcome count must be positive");
    std::mt19937_64 rng(seed);
    const auto n = static_cast<Eigen::Index>(d);
    std::vector<CMatrix> raw;
    CMatrix total = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < outcomes; ++k) {
        const CMatrix g = ginibre(d, d, rng);
        raw.push_back(g * g.adjoint());
        total += raw.back();
    }
    const CMatrix s = linalg::inverse_sqrt_psd(total);
    std::vector<CMatrix> elements;
    for (auto& a : raw) {
        CMatrix e = s * a * s;
        elements.push_back(0.5 * (e + e.adjoint()));
    }
    return Povm::make(std::move(elements));
}

}  // namespace retro
