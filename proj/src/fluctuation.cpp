#include "retro/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace retro {

namespace {

std::string format_parameter(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double checked(double v, const char* what, double arg) {
    if (!std::isfinite(v)) {
        throw Error(ErrorCode::DomainError, std::string(what) + " is not finite at " + format_parameter(arg));
    }
    return v;
}

void require_nonzero(double p, const char* what) {
    if (p == 0.0 || !std::isfinite(p)) {
        throw Error(ErrorCode::ZeroParameter, std::string(what) + " must be finite and nonzero");
    }
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace

// ---------------------------------------------------------------------------
// FFamily

FFamily FFamily::log(double z) {
    require_nonzero(z, "log family parameter z");
    return FFamily(
        FKind::log, z, "log:" + format_parameter(z),
        [z](double r) { return std::log(r) / z; },
        [z](double w) { return std::exp(z * w); },
        [](double w) { return -w; },
        [](double) { return -1.0; });
}

FFamily FFamily::power(double alpha) {
    require_nonzero(alpha, "power family parameter alpha");
    return FFamily(
        FKind::power, alpha, "power:" + format_parameter(alpha),
        [alpha](double r) { return std::pow(r, alpha); },
        [alpha](double w) {
            if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
            return std::pow(w, 1.0 / alpha);
        },
        [](double w) { return 1.0 / w; },
        [](double w) { return -1.0 / (w * w); });
}

FFamily FFamily::exp(double kappa) {
    require_nonzero(kappa, "exp family parameter kappa");
    return FFamily(
        FKind::exp, kappa, "exp:" + format_parameter(kappa),
        [kappa](double r) { return std::exp(kappa * r); },
        [kappa](double w) {
            if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
            const double r = std::log(w) / kappa;
            return r > 0.0 ? r : std::numeric_limits<double>::quiet_NaN();
        },
        // ln(w) = 0 corresponds to r = 0, outside the domain; left to produce a non-finite value.
        [kappa](double w) {
            const double l = std::log(w);
            if (!(w > 0.0) || l == 0.0) return std::numeric_limits<double>::quiet_NaN();
            return std::exp(kappa * kappa / l);
        },
        [kappa](double w) {
            const double l = std::log(w);
            if (!(w > 0.0) || l == 0.0) return std::numeric_limits<double>::quiet_NaN();
            return -std::exp(kappa * kappa / l) * kappa * kappa / (l * l * w);
        });
}

FFamily FFamily::custom(std::string name, Fn f, Fn f_inverse, Fn g, Fn g_prime) {
    if (!f || !f_inverse || !g || !g_prime) {
        throw Error(ErrorCode::NonInvertibleCustom, "custom family '" + name + "' is missing a callable");
    }
    const auto grid = log_grid(1e-6, 1e6, 1000);
    int direction = 0;
    double previous = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        const double v = f(r);
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonInvertibleCustom, "f is not finite at r = " + format_parameter(r));
        }
        if (i > 0) {
            const int step = v > previous ? 1 : (v < previous ? -1 : 0);
            if (step == 0 || (direction != 0 && step != direction)) {
                throw Error(ErrorCode::NonInvertibleCustom,
                            "f is not strictly monotone near r = " + format_parameter(r));
            }
            direction = step;
        }
        previous = v;
        if (!close_rel(f_inverse(v), r, 1e-10) || !std::isfinite(f_inverse(v))) {
            throw Error(ErrorCode::NonInvertibleCustom, "f_inverse(f(r)) != r at r = " + format_parameter(r));
        }
        const double expected = f(1.0 / r);
        const double got = g(v);
        if (!std::isfinite(got) || !close_rel(got, expected, 1e-10)) {
            throw Error(ErrorCode::NonInvertibleCustom, "g(f(r)) != f(1/r) at r = " + format_parameter(r));
        }
    }
    return FFamily(FKind::custom, 0.0, "custom:" + name, std::move(f), std::move(f_inverse), std::move(g),
                   std::move(g_prime));
}

double FFamily::f(double r) const {
    if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "f needs a positive argument, got " + format_parameter(r));
    return checked(f_(r), "f", r);
}
double FFamily::f_inverse(double w) const { return checked(f_inverse_(w), "f_inverse", w); }
double FFamily::g(double w) const { return checked(g_(w), "g", w); }
double FFamily::g_prime(double w) const { return checked(g_prime_(w), "g_prime", w); }

FFamily make_f_family(FKind kind, double parameter) {
    switch (kind) {
        case FKind::log: return FFamily::log(parameter);
        case FKind::power: return FFamily::power(parameter);
        case FKind::exp: return FFamily::exp(parameter);
        case FKind::custom: break;
    }
    throw Error(ErrorCode::InvalidArgument, "custom families need FFamily::custom");
}

FFamily parse_f_family(const std::string& name) {
    const auto colon = name.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "bad family name '" + name + "'");
    const std::string kind = name.substr(0, colon);
    const std::string value = name.substr(colon + 1);
    std::size_t used = 0;
    double parameter = 0.0;
    try {
        parameter = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) {
        throw Error(ErrorCode::InvalidArgument, "bad family parameter in '" + name + "'");
    }
    if (kind == "log") return FFamily::log(parameter);
    if (kind == "power") return FFamily::power(parameter);
    if (kind == "exp") return FFamily::exp(parameter);
    throw Error(ErrorCode::InvalidArgument, "unknown family kind '" + kind + "'");
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = std::exp(a + t * (b - a));
    }
    out.front() = lo;
    if (n > 1) out.back() = hi;
    return out;
}

// ---------------------------------------------------------------------------
// omega and measures

OmegaTable omega_variables(const RatioTable& ratios, const FFamily& family) {
    OmegaTable out;
    out.forward = PairTable{ratios.xs, ratios.ys, ratios.pairs, {}};
    out.reverse = PairTable{ratios.xs, ratios.ys, ratios.pairs, {}};
    out.forward.values.reserve(ratios.size());
    out.reverse.values.reserve(ratios.size());
    for (double r : ratios.values) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw Error(ErrorCode::DomainError, "ratio " + format_parameter(r) + " is not finite and positive");
        }
        const double wf = family.f(r);
        const double wr = family.g(wf);
        const double direct = family.f(1.0 / r);
        out.max_consistency_residual =
            std::max(out.max_consistency_residual, std::abs(wr - direct) / std::max(1.0, std::abs(direct)));
        out.forward.values.push_back(wf);
        out.reverse.values.push_back(wr);
    }
    return out;
}

double DiscreteMeasure::total_weight() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
}

const Atom* DiscreteMeasure::find(double value, double tol) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), value,
                               [](const Atom& a, double v) { return a.value < v; });
    const Atom* best = nullptr;
    double best_gap = tol;
    for (auto cand : {it, it == atoms_.begin() ? atoms_.end() : std::prev(it)}) {
        if (cand == atoms_.end()) continue;
        const double gap = std::abs(cand->value - value);
        if (gap <= best_gap) {
            best_gap = gap;
            best = &*cand;
        }
    }
    return best;
}

DiscreteMeasure measure_of(const JointProcess& joint, const PairTable& values, double merge_tol) {
    if (values.values.size() != values.pairs.size()) {
        throw Error(ErrorCode::DimensionMismatch, "pair table has mismatched value count");
    }
    const auto mass = joint_mass_on(joint, values);
    std::vector<std::pair<double, double>> items;
    items.reserve(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (!std::isfinite(values.values[i])) {
            throw Error(ErrorCode::DomainError, "non-finite value in measure construction");
        }
        items.emplace_back(values.values[i], mass[i]);
    }
    std::sort(items.begin(), items.end());

    std::vector<Atom> atoms;
    std::size_t start = 0;
    while (start < items.size()) {
        std::size_t end = start + 1;
        while (end < items.size() && items[end].first - items[end - 1].first <= merge_tol) ++end;
        double weight = 0.0;
        double moment = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            weight += items[k].second;
            moment += items[k].second * items[k].first;
        }
        double value = items[start].first;
        if (end - start > 1) {
            value = weight > 0.0 ? moment / weight : 0.5 * (items[start].first + items[end - 1].first);
        }
        atoms.push_back({value, weight});
        start = end;
    }
    return DiscreteMeasure(std::move(atoms), merge_tol);
}

// ---------------------------------------------------------------------------
// Fluctuation relations

CrooksReport crooks_residuals(const DiscreteMeasure& mu_f, const DiscreteMeasure& mu_r, const FFamily& family) {
    return crooks_residuals(mu_f, mu_r, family, std::max(mu_f.merge_tol(), mu_r.merge_tol()));
}

CrooksReport crooks_residuals(const DiscreteMeasure& mu_f, const DiscreteMeasure& mu_r, const FFamily& family,
                              double match_tol) {
    CrooksReport report;
    std::vector<bool> matched(mu_r.size(), false);
    for (const auto& atom : mu_f.atoms()) {
        if (!(atom.weight > 0.0)) continue;
        const double target = family.g(atom.value);
        const Atom* rev = mu_r.find(target, match_tol);
        if (rev == nullptr) {
            throw Error(ErrorCode::MissingReverseAtom,
                        "no reverse atom at g(" + format_parameter(atom.value) + ") = " + format_parameter(target));
        }
        matched[static_cast<std::size_t>(rev - mu_r.atoms().data())] = true;
        CrooksRow row;
        row.omega = atom.value;
        row.forward_weight = atom.weight;
        row.target = target;
        row.reverse_weight = rev->weight;
        row.predicted = family.f_inverse(target) * atom.weight;
        row.residual = std::abs(row.reverse_weight - row.predicted);
        report.max_residual = std::max(report.max_residual, row.residual);
        report.rows.push_back(row);
    }
    for (std::size_t k = 0; k < mu_r.size(); ++k) {
        const auto& atom = mu_r.atoms()[k];
        if (matched[k] || !(atom.weight > 0.0)) continue;
        CrooksRow row;
        row.omega = std::numeric_limits<double>::quiet_NaN();
        row.target = atom.value;
        row.reverse_weight = atom.weight;
        row.residual = atom.weight;
        report.max_residual = std::max(report.max_residual, row.residual);
        report.rows.push_back(row);
    }
    return report;
}

double jarzynski_average(const JointProcess& pf, const PairTable& omega_f, const FFamily& family) {
    const auto mass = joint_mass_on(pf, omega_f);
    double sum = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        sum += mass[i] * family.f_inverse(family.g(omega_f.values[i]));
    }
    return sum;
}

double f_divergence(const JointProcess& pf, const JointProcess& pr, const std::function<double(double)>& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pf.xs().size(); ++i) {
        for (std::size_t j = 0; j < pf.ys().size(); ++j) {
            const double a = pf(i, j);
            if (!(a > 0.0)) continue;
            const double b = pr.mass(pf.xs().label(i), pf.ys().label(j));
            if (!(b > 0.0)) return std::numeric_limits<double>::infinity();
            const double v = f(a / b);
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::DomainError, "f is not finite at ratio " + format_parameter(a / b));
            }
            sum += a * v;
        }
    }
    return sum;
}

double f_divergence(const JointProcess& pf, const JointProcess& pr, const FFamily& family) {
    return f_divergence(pf, pr, [&family](double r) { return family.f(r); });
}

}  // namespace retro
