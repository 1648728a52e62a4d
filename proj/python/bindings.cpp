#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "retro/pipeline.hpp"
#include "retro/plot.hpp"
#include "retro/scenario_file.hpp"
#include "retro/scenarios.hpp"

namespace py = pybind11;
using namespace retro;

namespace {

std::vector<FFamily> families_from(const std::vector<std::string>& names) {
    std::vector<FFamily> out;
    for (const auto& n : names) out.push_back(parse_f_family(n));
    if (out.empty()) out.push_back(FFamily::log(1.0));
    return out;
}

py::dict pair_table_dict(const PairTable& t, const std::vector<double>& values) {
    py::list xs;
    py::list ys;
    for (const auto& p : t.pairs) {
        xs.append(t.xs.label(p.x));
        ys.append(t.ys.label(p.y));
    }
    py::dict d;
    d["x"] = xs;
    d["y"] = ys;
    d["values"] = values;
    return d;
}

py::dict run_dict(const ScenarioRun& run, const std::vector<std::string>& families, double merge_tol) {
    const Evaluation ev = evaluate_run(run, families_from(families), merge_tol);
    py::dict d;
    d["kind"] = run.kind;
    d["forward"] = run.forward.matrix();
    d["reverse"] = run.reverse.matrix();
    d["xs"] = run.forward.xs().labels();
    d["ys"] = run.forward.ys().labels();
    d["ratio"] = pair_table_dict(run.ratio, run.ratio.values);
    d["labels"] = run.labels;
    if (run.beta) d["beta"] = *run.beta;
    if (run.delta_f) d["delta_f"] = *run.delta_f;
    if (run.efficacy) d["efficacy"] = *run.efficacy;
    if (run.gamma) d["gamma"] = run.gamma->mass();
    if (run.reverse_channel) d["reverse_channel"] = run.reverse_channel->matrix();
    d["diagnostics"] = run.diagnostics;
    py::list fams;
    for (std::size_t i = 0; i < ev.families.size(); ++i) {
        const auto& f = ev.families[i];
        py::dict fd;
        fd["family"] = f.family;
        fd["jarzynski_average"] = f.jarzynski_average;
        fd["jarzynski_expected"] = f.jarzynski_expected;
        fd["max_crooks_residual"] = f.max_crooks_residual;
        fd["f_divergence"] = f.f_divergence;
        py::list atoms_f;
        for (const Atom& a : ev.checks[i].mu_f.atoms()) atoms_f.append(py::make_tuple(a.value, a.weight));
        py::list atoms_r;
        for (const Atom& a : ev.checks[i].mu_r.atoms()) atoms_r.append(py::make_tuple(a.value, a.weight));
        fd["forward_atoms"] = atoms_f;
        fd["reverse_atoms"] = atoms_r;
        fams.append(fd);
    }
    d["families"] = fams;
    py::dict ids;
    for (const auto& c : ev.identities) ids[py::str(c.name)] = c.residual;
    d["residuals"] = ids;
    return d;
}

KrausChannel channel_from(const std::vector<CMatrix>& ops) { return KrausChannel::make(ops); }

}  // namespace

PYBIND11_MODULE(_retrodiction, m) {
    m.doc() = "Bayesian retrodiction and fluctuation relations (C++ core)";

    static py::handle error_type = py::exception<Error>(m, "RetroError", PyExc_ValueError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = error_type(e.what());
            err.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    m.def(
        "steady_state",
        [](const Eigen::MatrixXd& phi, std::optional<std::vector<double>> seed) {
            const StochasticChannel c = StochasticChannel::make(phi);
            std::optional<Distribution> s;
            if (seed) s = validate_distribution(c.inputs(), *seed);
            const SteadyState ss = steady_state(c, s);
            return py::make_tuple(ss.gamma.mass(), ss.unique, ss.residual);
        },
        py::arg("phi"), py::arg("seed") = py::none(),
        "Invariant distribution of a row-stochastic matrix: (gamma, unique, residual).");

    m.def(
        "bayes_reverse",
        [](const Eigen::MatrixXd& phi, const std::vector<double>& gamma) {
            const StochasticChannel c = StochasticChannel::make(phi);
            const StochasticChannel r = bayes_reverse_channel(c, validate_distribution(c.inputs(), gamma));
            return py::make_tuple(r.matrix(), r.inputs().labels(), r.outputs().labels());
        },
        py::arg("phi"), py::arg("gamma"),
        "Reverse channel phihat[y, x] on supp(gamma) with its row and column labels.");

    m.def(
        "classical_scenario",
        [](const Eigen::MatrixXd& phi, const std::vector<double>& p, const std::vector<double>& q,
           std::optional<std::vector<double>> gamma, const std::vector<std::string>& families, double merge_tol) {
            const StochasticChannel c = StochasticChannel::make(phi);
            std::optional<Distribution> g;
            if (gamma) g = validate_distribution(c.inputs(), *gamma);
            return run_dict(bayesian_scenario(c, validate_distribution(c.inputs(), p),
                                              validate_distribution(c.outputs(), q), g),
                            families, merge_tol);
        },
        py::arg("phi"), py::arg("p"), py::arg("q"), py::arg("gamma") = py::none(),
        py::arg("families") = std::vector<std::string>{"log:1"}, py::arg("merge_tol") = kMergeTol);

    m.def(
        "tasaki",
        [](const std::vector<double>& eps, const std::vector<double>& eta, const CMatrix& u, double beta,
           const std::vector<std::string>& families) {
            return run_dict(tasaki_scenario(eps, eta, u, beta), families, kMergeTol);
        },
        py::arg("eps"), py::arg("eta"), py::arg("unitary"), py::arg("beta"),
        py::arg("families") = std::vector<std::string>{"log:1"});

    m.def(
        "two_measurement",
        [](const std::vector<double>& eps, const std::vector<double>& eta, const std::vector<CMatrix>& kraus,
           double beta, std::optional<CMatrix> preparation_basis, std::optional<CMatrix> measurement_basis,
           const std::vector<std::string>& families) {
            TwoMeasurementConfig c;
            c.eps = eps;
            c.eta = eta;
            c.channel = channel_from(kraus);
            c.beta = beta;
            if (preparation_basis) c.preparation_basis = *preparation_basis;
            if (measurement_basis) c.measurement_basis = *measurement_basis;
            return run_dict(general_two_measurement_scenario(c), families, kMergeTol);
        },
        py::arg("eps"), py::arg("eta"), py::arg("kraus"), py::arg("beta"), py::arg("preparation_basis") = py::none(),
        py::arg("measurement_basis") = py::none(), py::arg("families") = std::vector<std::string>{"log:1"});

    m.def(
        "microcanonical",
        [](const std::vector<std::size_t>& perm, const std::vector<double>& energies,
           const std::vector<double>& final_energies, double initial_shell, double final_shell) {
            DeterministicPriors pr;
            pr.kind = PriorKind::microcanonical;
            pr.final_energies = final_energies;
            pr.initial_shell = initial_shell;
            pr.final_shell = final_shell;
            return run_dict(deterministic_hamiltonian_scenario(perm, energies, pr), {"log:1"}, kMergeTol);
        },
        py::arg("perm"), py::arg("energies"), py::arg("final_energies"), py::arg("initial_shell"),
        py::arg("final_shell"));

    m.def(
        "hybrid_reversal",
        [](const std::vector<std::size_t>& perm, std::size_t system_size, const std::vector<double>& energies,
           double beta, const std::vector<double>& p, const std::vector<double>& q) {
            const Alphabet xs = Alphabet::indexed(system_size);
            const Jarz2000Result r =
                jarz2000_scenario(perm, system_size, energies, beta, validate_distribution(xs, p),
                                  validate_distribution(xs, q));
            py::dict d = run_dict(r.run, {"log:1"}, kMergeTol);
            d["delta_s_values"] = r.delta_s_values;
            d["max_residual"] = r.max_residual;
            return d;
        },
        py::arg("perm"), py::arg("system_size"), py::arg("reservoir_energies"), py::arg("beta"), py::arg("p"),
        py::arg("q"));

    m.def(
        "petz_reverse",
        [](const std::vector<CMatrix>& kraus, const CMatrix& gamma0) {
            const PetzMap pm = petz_reverse(channel_from(kraus), gamma0);
            py::dict d;
            d["kraus"] = pm.map.operators();
            d["choi_min_eigenvalue"] = pm.choi_min_eigenvalue;
            d["trace_residual"] = pm.trace_residual;
            d["fixed_point_residual"] = pm.fixed_point_residual;
            return d;
        },
        py::arg("kraus"), py::arg("gamma0"), "Petz recovery map of a Kraus channel with its validity residuals.");

    m.def(
        "apply_kraus", [](const std::vector<CMatrix>& kraus, const CMatrix& x) { return KrausMap(kraus).apply(x); },
        py::arg("kraus"), py::arg("x"));

    m.def("haar_unitary", &haar_unitary, py::arg("d"), py::arg("seed"));
    m.def(
        "random_channel",
        [](std::size_t d_in, std::size_t d_out, std::size_t rank, std::uint64_t seed) {
            return random_channel(d_in, d_out, rank, seed).operators();
        },
        py::arg("d_in"), py::arg("d_out"), py::arg("kraus_rank"), py::arg("seed"));
    m.def(
        "amplitude_damping", [](double eta) { return KrausChannel::amplitude_damping(eta).operators(); },
        py::arg("eta"));

    m.def(
        "f_family",
        [](const std::string& name, double r) {
            const FFamily f = parse_f_family(name);
            const double w = f.f(r);
            return py::make_tuple(w, f.f_inverse(w), f.g(w));
        },
        py::arg("name"), py::arg("r"), "(f(r), f^-1(f(r)), g(f(r))) for a named family such as \"power:2\".");

    m.def(
        "parse_scenario",
        [](const std::string& text) {
            const ScenarioFile sf = parse_scenario_text(text);
            py::dict d;
            d["kind"] = sf.kind;
            d["seed"] = sf.seed;
            py::list fams;
            for (const auto& f : sf.f_families) fams.append(f.name());
            d["f_families"] = fams;
            return d;
        },
        py::arg("text"));

    m.def(
        "run_scenario_file",
        [](const std::filesystem::path& path, const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed,
           std::optional<double> tol, bool plot) {
            RunOptions o;
            o.seed = seed;
            o.tol = tol;
            o.plot = plot;
            const RunReport report = run_pipeline(parse_scenario_file(path), out_dir, o);
            return report_to_json(report).dump();
        },
        py::arg("path"), py::arg("out_dir"), py::arg("seed") = py::none(), py::arg("tol") = py::none(),
        py::arg("plot") = false, "Runs the pipeline and returns summary.json as text.");
}
