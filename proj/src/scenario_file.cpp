#include "retro/scenario_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace retro {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::SchemaError, path + ": " + what);
}

std::string type_name(const json& j) { return j.type_name(); }

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) schema_error(path, "expected a number, got " + type_name(j));
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema_error(path, "number is not finite");
    return v;
}

std::size_t as_count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) schema_error(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

std::vector<double> as_reals(const json& j, const std::string& path) {
    if (!j.is_array()) schema_error(path, "expected an array of numbers, got " + type_name(j));
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::size_t> as_counts(const json& j, const std::string& path) {
    if (!j.is_array()) schema_error(path, "expected an array of integers, got " + type_name(j));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_count(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::string> as_labels(const json& j, const std::string& path) {
    if (!j.is_array()) schema_error(path, "expected an array of strings");
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_string()) schema_error(at, "expected a string");
        if (!seen.insert(j[i].get<std::string>()).second) schema_error(at, "duplicate label");
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

Complex as_complex(const json& j, const std::string& path) {
    if (j.is_number()) return {as_number(j, path), 0.0};
    if (j.is_array() && j.size() == 2) return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
    schema_error(path, "expected a number or a [re, im] pair");
}

Eigen::MatrixXd as_real_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) schema_error(path, "expected a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Eigen::MatrixXd m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        const auto row = as_reals(j[i], at);
        if (row.size() != cols || cols == 0) schema_error(at, "rows must have equal nonzero length");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = row[c];
    }
    return m;
}

CMatrix as_complex_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) schema_error(path, "expected a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    CMatrix m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != cols || cols == 0) {
            schema_error(at, "rows must have equal nonzero length");
        }
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = as_complex(j[i][c], at + "[" + std::to_string(c) + "]");
    }
    return m;
}

// Object accessor that remembers which keys were read so the rest can be rejected.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) schema_error(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& required(const std::string& key) {
        if (!j_.contains(key)) schema_error(at(key), "missing required field");
        used_.insert(key);
        return j_.at(key);
    }

    const json* optional(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!used_.count(item.key())) schema_error(at(item.key()), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Distribution as_distribution(const json& j, const Alphabet& alphabet, const std::string& path) {
    if (j.is_string()) {
        if (j.get<std::string>() == "uniform") return uniform_distribution(alphabet);
        schema_error(path, "unknown distribution shorthand '" + j.get<std::string>() + "'");
    }
    auto mass = as_reals(j, path);
    if (mass.size() != alphabet.size()) {
        schema_error(path, "expected " + std::to_string(alphabet.size()) + " entries, got " +
                               std::to_string(mass.size()));
    }
    try {
        return validate_distribution(alphabet, std::move(mass));
    } catch (const Error& e) {
        schema_error(path, e.what());
    }
}

StochasticChannel as_channel(const json& j, const Alphabet& inputs, const Alphabet& outputs,
                             const std::string& path) {
    const Eigen::MatrixXd m = as_real_matrix(j, path);
    if (static_cast<std::size_t>(m.rows()) != inputs.size() || static_cast<std::size_t>(m.cols()) != outputs.size()) {
        schema_error(path, "expected a " + std::to_string(inputs.size()) + " x " + std::to_string(outputs.size()) +
                               " matrix");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        if (m.row(i).minCoeff() < 0.0) schema_error(at, "row has a negative entry");
        const double sum = m.row(i).sum();
        if (std::abs(sum - 1.0) > kTolNorm) {
            std::ostringstream os;
            os.precision(17);
            os << "row is not stochastic (sums to " << sum << ")";
            schema_error(at, os.str());
        }
    }
    return StochasticChannel::make(inputs, outputs, m);
}

Alphabet labels_or_indexed(Fields& f, const std::string& key, std::size_t n) {
    if (const json* j = f.optional(key)) {
        auto labels = as_labels(*j, f.at(key));
        if (labels.size() != n) schema_error(f.at(key), "expected " + std::to_string(n) + " labels");
        return Alphabet(std::move(labels));
    }
    return Alphabet::indexed(n);
}

double positive_beta(Fields& f) {
    const double beta = as_number(f.required("beta"), f.at("beta"));
    if (!(beta > 0.0)) schema_error(f.at("beta"), "beta must be positive");
    return beta;
}

CMatrix as_unitary(const json& j, std::size_t d, std::uint64_t seed, std::uint64_t stream, const std::string& path) {
    CMatrix u;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "haar") {
            u = haar_unitary(d, derive_seed(seed, stream));
        } else if (s == "identity") {
            u = CMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        } else {
            schema_error(path, "expected a matrix, \"haar\" or \"identity\"");
        }
    } else {
        u = as_complex_matrix(j, path);
    }
    if (u.rows() != static_cast<Eigen::Index>(d) || u.cols() != static_cast<Eigen::Index>(d)) {
        schema_error(path, "expected a " + std::to_string(d) + " x " + std::to_string(d) + " matrix");
    }
    const double defect =
        (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    if (defect > 1e-10) schema_error(path, "matrix is not unitary");
    return u;
}

KrausChannel as_kraus_channel(const json& j, std::size_t d, std::uint64_t seed, const std::string& path) {
    Fields f(j, path);
    const json& type = f.required("type");
    if (!type.is_string()) schema_error(f.at("type"), "expected a string");
    const std::string t = type.get<std::string>();
    KrausChannel channel;
    try {
        if (t == "kraus") {
            const json& ops = f.required("operators");
            if (!ops.is_array() || ops.empty()) schema_error(f.at("operators"), "expected a nonempty list");
            std::vector<CMatrix> mats;
            for (std::size_t k = 0; k < ops.size(); ++k) {
                mats.push_back(as_complex_matrix(ops[k], f.at("operators") + "[" + std::to_string(k) + "]"));
            }
            channel = KrausChannel::make(std::move(mats));
        } else if (t == "unitary") {
            channel = KrausChannel::unitary(as_unitary(f.required("matrix"), d, seed, 3, f.at("matrix")));
        } else if (t == "amplitude_damping") {
            channel = KrausChannel::amplitude_damping(as_number(f.required("eta"), f.at("eta")));
        } else if (t == "depolarizing") {
            channel = KrausChannel::depolarizing(d, as_number(f.required("p"), f.at("p")));
        } else if (t == "identity") {
            channel = KrausChannel::identity(d);
        } else if (t == "random") {
            const std::size_t rank = as_count(f.required("kraus_rank"), f.at("kraus_rank"));
            if (rank == 0) schema_error(f.at("kraus_rank"), "must be positive");
            channel = random_channel(d, d, rank, derive_seed(seed, 4));
        } else {
            schema_error(f.at("type"), "unknown channel type '" + t + "'");
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaError) throw;
        schema_error(path, e.what());
    }
    f.finish();
    if (channel.input_dim() != d || channel.output_dim() != d) {
        schema_error(path, "channel must act on dimension " + std::to_string(d));
    }
    return channel;
}

ClassicalConfig classical_config(Fields& f) {
    const Eigen::MatrixXd raw = as_real_matrix(f.required("channel"), f.at("channel"));
    const Alphabet inputs = labels_or_indexed(f, "inputs", static_cast<std::size_t>(raw.rows()));
    const Alphabet outputs = labels_or_indexed(f, "outputs", static_cast<std::size_t>(raw.cols()));
    ClassicalConfig c;
    c.channel = as_channel(f.required("channel"), inputs, outputs, f.at("channel"));
    c.p = as_distribution(f.required("p"), inputs, f.at("p"));
    c.q = as_distribution(f.required("q"), outputs, f.at("q"));
    if (const json* g = f.optional("gamma")) {
        if (!(inputs == outputs)) schema_error(f.at("gamma"), "gamma needs a square channel");
        c.gamma = as_distribution(*g, inputs, f.at("gamma"));
    }
    return c;
}

TasakiConfig tasaki_config(Fields& f, std::uint64_t seed) {
    TasakiConfig c;
    c.eps = as_reals(f.required("eps"), f.at("eps"));
    c.eta = as_reals(f.required("eta"), f.at("eta"));
    if (c.eps.empty()) schema_error(f.at("eps"), "must be nonempty");
    if (c.eta.size() != c.eps.size()) schema_error(f.at("eta"), "must have the same length as eps");
    c.beta = positive_beta(f);
    c.unitary = as_unitary(f.required("unitary"), c.eps.size(), seed, 1, f.at("unitary"));
    return c;
}

DeterministicConfig deterministic_config(Fields& f) {
    DeterministicConfig c;
    c.perm = as_counts(f.required("permutation"), f.at("permutation"));
    c.energies = as_reals(f.required("energies"), f.at("energies"));
    if (c.energies.size() != c.perm.size()) schema_error(f.at("energies"), "must match the permutation length");
    Fields pf(f.required("priors"), f.at("priors"));
    const json& type = pf.required("type");
    const std::string t = type.is_string() ? type.get<std::string>() : "";
    if (const json* fe = pf.optional("final_energies")) {
        c.priors.final_energies = as_reals(*fe, pf.at("final_energies"));
        if (c.priors.final_energies->size() != c.perm.size()) {
            schema_error(pf.at("final_energies"), "must match the permutation length");
        }
    }
    if (t == "thermal") {
        c.priors.kind = PriorKind::thermal;
        c.priors.beta = positive_beta(pf);
    } else if (t == "microcanonical") {
        c.priors.kind = PriorKind::microcanonical;
        c.priors.initial_shell = as_number(pf.required("initial_shell"), pf.at("initial_shell"));
        c.priors.final_shell = as_number(pf.required("final_shell"), pf.at("final_shell"));
        if (const json* tol = pf.optional("shell_tol")) c.priors.shell_tol = as_number(*tol, pf.at("shell_tol"));
    } else {
        schema_error(pf.at("type"), "expected \"thermal\" or \"microcanonical\"");
    }
    pf.finish();
    return c;
}

Jarz2000Config jarz2000_config(Fields& f) {
    Jarz2000Config c;
    c.perm = as_counts(f.required("permutation"), f.at("permutation"));
    c.system_size = as_count(f.required("system_size"), f.at("system_size"));
    c.reservoir_energies = as_reals(f.required("reservoir_energies"), f.at("reservoir_energies"));
    if (c.system_size == 0 || c.reservoir_energies.empty()) schema_error(f.at("system_size"), "empty product space");
    if (c.perm.size() != c.system_size * c.reservoir_energies.size()) {
        schema_error(f.at("permutation"), "length must be system_size * |reservoir_energies|");
    }
    c.beta = positive_beta(f);
    const Alphabet xs = Alphabet::indexed(c.system_size);
    c.p = as_distribution(f.required("p"), xs, f.at("p"));
    c.q = as_distribution(f.required("q"), xs, f.at("q"));
    return c;
}

RelaxationConfig relaxation_config(Fields& f) {
    RelaxationConfig c;
    c.e_pre = as_reals(f.required("e_pre"), f.at("e_pre"));
    c.e_post = as_reals(f.required("e_post"), f.at("e_post"));
    if (c.e_pre.empty() || c.e_post.size() != c.e_pre.size()) {
        schema_error(f.at("e_post"), "must be nonempty and match e_pre");
    }
    c.beta = positive_beta(f);
    const Alphabet labels = Alphabet::indexed(c.e_pre.size());
    Fields rf(f.required("relax"), f.at("relax"));
    const json& type = rf.required("type");
    const std::string t = type.is_string() ? type.get<std::string>() : "";
    if (t == "thermalization") {
        const double lambda = as_number(rf.required("lambda"), rf.at("lambda"));
        if (!(lambda >= 0.0 && lambda <= 1.0)) schema_error(rf.at("lambda"), "must lie in [0, 1]");
        c.relax = thermalization_channel(ThermalSpec{c.e_post, c.beta}.distribution(labels), lambda);
    } else if (t == "matrix") {
        c.relax = as_channel(rf.required("matrix"), labels, labels, rf.at("matrix"));
    } else {
        schema_error(rf.at("type"), "expected \"thermalization\" or \"matrix\"");
    }
    rf.finish();
    return c;
}

TwoMeasurementConfig two_measurement_config(Fields& f, std::uint64_t seed) {
    TwoMeasurementConfig c;
    c.eps = as_reals(f.required("eps"), f.at("eps"));
    c.eta = as_reals(f.required("eta"), f.at("eta"));
    if (c.eps.empty() || c.eta.size() != c.eps.size()) schema_error(f.at("eta"), "must be nonempty and match eps");
    const std::size_t d = c.eps.size();
    c.beta = positive_beta(f);
    c.channel = as_kraus_channel(f.required("channel"), d, seed, f.at("channel"));
    if (const json* b = f.optional("preparation_basis")) {
        c.preparation_basis = as_unitary(*b, d, seed, 5, f.at("preparation_basis"));
    }
    if (const json* b = f.optional("measurement_basis")) {
        c.measurement_basis = as_unitary(*b, d, seed, 6, f.at("measurement_basis"));
    }
    if (const json* g = f.optional("gamma")) c.gamma = as_distribution(*g, Alphabet::indexed(d), f.at("gamma"));
    return c;
}

RandomConfig random_config(Fields& f) {
    static const std::map<std::string, RandomKind> kinds = {
        {"classical", RandomKind::classical_channel},
        {"doubly_stochastic", RandomKind::doubly_stochastic_channel},
        {"quantum_process", RandomKind::quantum_process},
        {"two_measurement", RandomKind::two_measurement},
        {"reservoir", RandomKind::reservoir},
    };
    RandomConfig c;
    const json& g = f.required("generator");
    const auto it = g.is_string() ? kinds.find(g.get<std::string>()) : kinds.end();
    if (it == kinds.end()) schema_error(f.at("generator"), "unknown generator");
    c.kind = it->second;
    auto bounded = [&](const std::string& key, std::size_t fallback, std::size_t cap) {
        const json* j = f.optional(key);
        const std::size_t v = j ? as_count(*j, f.at(key)) : fallback;
        if (v == 0 || v > cap) schema_error(f.at(key), "must lie in [1, " + std::to_string(cap) + "]");
        return v;
    };
    c.dims.d = bounded("d", 2, 16);
    c.dims.labels = bounded("labels", c.dims.d, 16);
    c.dims.kraus_rank = bounded("kraus_rank", 2, 16);
    c.dims.reservoir = bounded("reservoir", 2, 16);
    if ((c.kind == RandomKind::quantum_process || c.kind == RandomKind::two_measurement) && c.dims.d > 8) {
        schema_error(f.at("d"), "Hilbert dimension is capped at 8");
    }
    return c;
}

FFamily as_family(const json& j, const std::string& path) {
    try {
        if (j.is_string()) return parse_f_family(j.get<std::string>());
        Fields f(j, path);
        const json& kind = f.required("kind");
        const double parameter = as_number(f.required("parameter"), f.at("parameter"));
        f.finish();
        if (!kind.is_string()) schema_error(f.at("kind"), "expected a string");
        return parse_f_family(kind.get<std::string>() + ":" + nlohmann::json(parameter).dump());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaError) throw;
        schema_error(path, e.what());
    }
}

}  // namespace

const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> kinds = {"classical",         "tasaki",          "deterministic", "jarz2000",
                                                   "crooks_relaxation", "two_measurement", "random"};
    return kinds;
}

ScenarioFile parse_scenario_text(std::string_view text, const std::string& source) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, source + ": " + e.what());
    }
    Fields f(root, "");
    ScenarioFile sf;
    sf.source = source;
    const json& version = f.required("schema_version");
    if (!version.is_number_integer()) schema_error("schema_version", "expected an integer");
    sf.schema_version = version.get<int>();
    if (sf.schema_version != kSchemaVersion) {
        throw Error(ErrorCode::VersionError, "schema_version " + std::to_string(sf.schema_version) +
                                                 " is not supported (expected " + std::to_string(kSchemaVersion) +
                                                 ")");
    }
    const json& kind = f.required("kind");
    if (!kind.is_string()) schema_error("kind", "expected a string");
    sf.kind = kind.get<std::string>();
    const auto& kinds = scenario_kinds();
    if (std::find(kinds.begin(), kinds.end(), sf.kind) == kinds.end()) {
        schema_error("kind", "unknown scenario kind '" + sf.kind + "'");
    }
    sf.parameters = f.required("parameters");
    if (const json* fam = f.optional("f_families")) {
        if (!fam->is_array() || fam->empty()) schema_error("f_families", "expected a nonempty list");
        for (std::size_t i = 0; i < fam->size(); ++i) {
            sf.f_families.push_back(as_family((*fam)[i], "f_families[" + std::to_string(i) + "]"));
        }
    } else {
        sf.f_families.push_back(FFamily::log(1.0));
    }
    if (const json* s = f.optional("seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
            schema_error("seed", "expected a nonnegative integer");
        }
        sf.seed = s->get<std::uint64_t>();
    }
    if (const json* m = f.optional("merge_tol")) {
        sf.merge_tol = as_number(*m, "merge_tol");
        if (!(sf.merge_tol >= 0.0)) schema_error("merge_tol", "must be nonnegative");
    }
    if (const json* d = f.optional("description")) {
        if (!d->is_string()) schema_error("description", "expected a string");
        sf.description = d->get<std::string>();
    }
    f.finish();
    // Validate the parameters once with the file's own seed.
    resolve_config(sf, sf.seed);
    return sf;
}

ScenarioFile parse_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path.string());
}

ScenarioConfig resolve_config(const ScenarioFile& file, std::uint64_t seed) {
    Fields f(file.parameters, "parameters");
    ScenarioConfig config;
    if (file.kind == "classical") {
        config = classical_config(f);
    } else if (file.kind == "tasaki") {
        config = tasaki_config(f, seed);
    } else if (file.kind == "deterministic") {
        config = deterministic_config(f);
    } else if (file.kind == "jarz2000") {
        config = jarz2000_config(f);
    } else if (file.kind == "crooks_relaxation") {
        config = relaxation_config(f);
    } else if (file.kind == "two_measurement") {
        config = two_measurement_config(f, seed);
    } else if (file.kind == "random") {
        config = random_config(f);
    } else {
        schema_error("kind", "unknown scenario kind '" + file.kind + "'");
    }
    f.finish();
    return config;
}

namespace {

struct Builder {
    std::uint64_t seed;

    ScenarioRun operator()(const ClassicalConfig& c) const { return bayesian_scenario(c.channel, c.p, c.q, c.gamma); }
    ScenarioRun operator()(const TasakiConfig& c) const { return tasaki_scenario(c.eps, c.eta, c.unitary, c.beta); }
    ScenarioRun operator()(const DeterministicConfig& c) const {
        return deterministic_hamiltonian_scenario(c.perm, c.energies, c.priors);
    }
    ScenarioRun operator()(const Jarz2000Config& c) const {
        return jarz2000_scenario(c.perm, c.system_size, c.reservoir_energies, c.beta, c.p, c.q).run;
    }
    ScenarioRun operator()(const RelaxationConfig& c) const {
        return crooks_work_relaxation_scenario(c.e_pre, c.e_post, c.relax, c.beta);
    }
    ScenarioRun operator()(const TwoMeasurementConfig& c) const { return general_two_measurement_scenario(c); }
    ScenarioRun operator()(const RandomConfig& c) const {
        const ScenarioInputs inputs = random_scenario(c.kind, c.dims, seed);
        if (const auto* rc = std::get_if<RandomClassical>(&inputs)) return bayesian_scenario(rc->channel, rc->p, rc->q);
        if (const auto* qp = std::get_if<QuantumProcess>(&inputs)) {
            const StochasticChannel phi = induced_transition(*qp);
            return bayesian_scenario(phi, random_distribution(phi.inputs(), derive_seed(seed, 40)),
                                     random_distribution(phi.outputs(), derive_seed(seed, 41)), qp->gamma());
        }
        if (const auto* tm = std::get_if<TwoMeasurementConfig>(&inputs)) return general_two_measurement_scenario(*tm);
        const auto& rr = std::get<RandomReservoir>(inputs);
        return jarz2000_scenario(rr.perm, rr.system_size, rr.reservoir_energies, rr.beta, rr.p, rr.q).run;
    }
};

}  // namespace

ScenarioRun build_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    return std::visit(Builder{seed}, config);
}

}  // namespace retro
