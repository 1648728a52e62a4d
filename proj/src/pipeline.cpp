#include "retro/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "retro/plot.hpp"

namespace retro {

using nlohmann::json;

Tolerances Tolerances::uniform(double tol) {
    Tolerances t;
    t.normalization = t.jarzynski = t.crooks = t.omega_consistency = t.sigma = t.hybrid = t.quantum_consistency = tol;
    return t;
}

bool RunReport::ok() const {
    return std::all_of(identities.begin(), identities.end(), [](const IdentityCheck& c) { return c.pass(); });
}

bool VerifyResult::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.pass(); });
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
            any = true;
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

double parse_number(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw Error(ErrorCode::ParseError, where + ": bad number '" + s + "'");
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

TableDigest digest(const std::string& name, const std::string& content, bool csv) {
    TableDigest d;
    d.file = name;
    const auto lines = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
    d.rows = csv && lines > 0 ? lines - 1 : lines;
    d.fnv1a64 = hex64(fnv1a64(content));
    return d;
}

json number_or_text(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

json distribution_json(const Distribution& d) {
    json out = json::object();
    for (std::size_t i = 0; i < d.size(); ++i) out[d.alphabet().label(i)] = d[i];
    return out;
}

json channel_json(const StochasticChannel& c) {
    json rows = json::array();
    for (std::size_t i = 0; i < c.inputs().size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < c.outputs().size(); ++j) row.push_back(c(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"inputs", c.inputs().labels()}, {"outputs", c.outputs().labels()}, {"matrix", rows}};
}

}  // namespace

Evaluation evaluate_run(const ScenarioRun& run, const std::vector<FFamily>& families, double merge_tol,
                        const Tolerances& tol) {
    Evaluation ev;
    ev.identities.push_back({"reverse_normalization", std::abs(run.reverse.matrix().sum() - 1.0), tol.normalization});
    for (const FFamily& family : families) {
        FamilyCheck c = check_family(run, family, merge_tol);
        FamilyResult r;
        r.family = c.family;
        r.jarzynski_average = c.jarzynski_average;
        r.jarzynski_expected = c.jarzynski_expected;
        r.jarzynski_residual = c.jarzynski_residual;
        r.max_crooks_residual = c.crooks.max_residual;
        r.omega_consistency_residual = c.omega.max_consistency_residual;
        r.f_divergence = c.f_divergence;
        r.forward_atoms = c.mu_f.size();
        r.reverse_atoms = c.mu_r.size();
        ev.identities.push_back({"jarzynski[" + c.family + "]", r.jarzynski_residual, tol.jarzynski});
        ev.identities.push_back({"crooks[" + c.family + "]", r.max_crooks_residual, tol.crooks});
        ev.identities.push_back(
            {"omega_consistency[" + c.family + "]", r.omega_consistency_residual, tol.omega_consistency});
        ev.families.push_back(std::move(r));
        ev.checks.push_back(std::move(c));
    }
    ev.identities.push_back({"sigma_label", sigma_label_residual(run), tol.sigma});
    if (auto it = run.diagnostics.find("hybrid_max_residual"); it != run.diagnostics.end()) {
        ev.identities.push_back({"hybrid_reversal", it->second, tol.hybrid});
    }
    if (auto it = run.diagnostics.find("quantum_classical_reverse_residual"); it != run.diagnostics.end()) {
        ev.identities.push_back({"quantum_classical_consistency", it->second, tol.quantum_consistency});
    }
    return ev;
}

std::string joint_csv(const ScenarioRun& run, const std::vector<FamilyCheck>& checks) {
    std::ostringstream os;
    os << "x,y,P_F,P_R,ratio";
    for (const auto& c : checks) os << "," << csv_field("omega_F[" + c.family + "]") << "," << csv_field("omega_R[" + c.family + "]");
    for (const auto& [name, values] : run.labels) os << "," << csv_field(name);
    os << "\n";
    const auto pf = joint_mass_on(run.forward, run.ratio);
    const auto pr = joint_mass_on(run.reverse, run.ratio);
    for (std::size_t i = 0; i < run.ratio.size(); ++i) {
        const auto& pair = run.ratio.pairs[i];
        os << csv_field(run.ratio.xs.label(pair.x)) << "," << csv_field(run.ratio.ys.label(pair.y)) << ","
           << format_double(pf[i]) << "," << format_double(pr[i]) << "," << format_double(run.ratio.values[i]);
        for (const auto& c : checks) {
            os << "," << format_double(c.omega.forward.values[i]) << "," << format_double(c.omega.reverse.values[i]);
        }
        for (const auto& [name, values] : run.labels) os << "," << format_double(values[i]);
        os << "\n";
    }
    return os.str();
}

std::string measures_csv(const std::vector<FamilyCheck>& checks) {
    std::ostringstream os;
    os << "family,direction,omega,weight\n";
    for (const auto& c : checks) {
        for (const auto& [mu, dir] : {std::pair{&c.mu_f, "forward"}, std::pair{&c.mu_r, "reverse"}}) {
            for (const Atom& a : mu->atoms()) {
                os << csv_field(c.family) << "," << dir << "," << format_double(a.value) << ","
                   << format_double(a.weight) << "\n";
            }
        }
    }
    return os.str();
}

RunReport run_pipeline(const ScenarioFile& file, const std::filesystem::path& out_dir, const RunOptions& options) {
    const std::uint64_t seed = options.seed.value_or(file.seed);
    const Tolerances tol = options.tol ? Tolerances::uniform(*options.tol) : Tolerances{};
    const ScenarioRun run = build_scenario(resolve_config(file, seed), seed);
    const Evaluation ev = evaluate_run(run, file.f_families, file.merge_tol, tol);

    RunReport report;
    report.kind = file.kind;
    report.source = std::filesystem::path(file.source).filename().string();
    report.seed = seed;
    report.families = ev.families;
    report.identities = ev.identities;
    report.beta = run.beta;
    report.delta_f = run.delta_f;
    report.efficacy = run.efficacy;
    report.gamma = run.gamma;
    report.gamma_unique = run.gamma_unique;
    report.diagnostics = run.diagnostics;
    report.dropped_forward_mass = run.ratio.dropped_forward_mass;
    report.dropped_reverse_mass = run.ratio.dropped_reverse_mass;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

    const std::string joint = joint_csv(run, ev.checks);
    const std::string measures = measures_csv(ev.checks);
    write_file(out_dir / "joint.csv", joint);
    write_file(out_dir / "measures.csv", measures);
    report.digests.push_back(digest("joint.csv", joint, true));
    report.digests.push_back(digest("measures.csv", measures, true));
    if (options.plot) {
        for (std::size_t i = 0; i < ev.checks.size(); ++i) {
            const std::string name = "plot_" + std::to_string(i) + ".svg";
            const std::string svg = render_plot(ev.checks[i].mu_f, ev.checks[i].mu_r, file.kind + " " + ev.checks[i].family);
            write_file(out_dir / name, svg);
            report.digests.push_back(digest(name, svg, false));
        }
    }
    write_file(out_dir / "summary.json", report_to_json(report).dump(2) + "\n");
    return report;
}

json report_to_json(const RunReport& report) {
    json families = json::array();
    for (const auto& f : report.families) {
        families.push_back({{"family", f.family},
                            {"jarzynski_average", f.jarzynski_average},
                            {"jarzynski_expected", f.jarzynski_expected},
                            {"jarzynski_residual", f.jarzynski_residual},
                            {"max_crooks_residual", f.max_crooks_residual},
                            {"omega_consistency_residual", f.omega_consistency_residual},
                            {"f_divergence", number_or_text(f.f_divergence)},
                            {"forward_atoms", f.forward_atoms},
                            {"reverse_atoms", f.reverse_atoms}});
    }
    json identities = json::array();
    for (const auto& c : report.identities) {
        identities.push_back(
            {{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
    }
    json digests = json::array();
    for (const auto& d : report.digests) digests.push_back({{"file", d.file}, {"rows", d.rows}, {"fnv1a64", d.fnv1a64}});

    json out = {{"kind", report.kind},
                {"source", report.source},
                {"seed", report.seed},
                {"ok", report.ok()},
                {"families", families},
                {"identities", identities},
                {"dropped_forward_mass", report.dropped_forward_mass},
                {"dropped_reverse_mass", report.dropped_reverse_mass},
                {"digests", digests}};
    if (report.beta) out["beta"] = *report.beta;
    if (report.delta_f) out["delta_f"] = *report.delta_f;
    if (report.efficacy) out["efficacy"] = *report.efficacy;
    if (report.gamma) {
        out["steady_state"] = {{"gamma", distribution_json(*report.gamma)}};
        if (report.gamma_unique) out["steady_state"]["unique"] = *report.gamma_unique;
    }
    if (!report.diagnostics.empty()) out["diagnostics"] = report.diagnostics;
    return out;
}

json reverse_summary(const ScenarioRun& run) {
    json out = json::object();
    out["kind"] = run.kind;
    if (run.gamma) out["gamma"] = distribution_json(*run.gamma);
    if (run.reverse_channel) out["reverse_channel"] = channel_json(*run.reverse_channel);
    if (run.forward_channel) out["forward_channel"] = channel_json(*run.forward_channel);
    return out;
}

VerifyResult verify_outputs(const std::filesystem::path& dir, const Tolerances& tol) {
    const auto joint = parse_csv(read_file(dir / "joint.csv"));
    const auto measures = parse_csv(read_file(dir / "measures.csv"));
    if (joint.empty() || joint[0].size() < 5) throw Error(ErrorCode::ParseError, "joint.csv has no header");
    const auto& header = joint[0];

    struct Column {
        FFamily family;
        std::size_t forward;
        std::size_t reverse;
    };
    std::vector<Column> columns;
    for (std::size_t c = 5; c + 1 < header.size(); ++c) {
        const std::string& h = header[c];
        if (h.rfind("omega_F[", 0) == 0 && h.back() == ']') {
            columns.push_back({parse_f_family(h.substr(8, h.size() - 9)), c, c + 1});
            ++c;
        }
    }

    VerifyResult result;
    double sum_pr = 0.0;
    double ratio_residual = 0.0;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < joint.size(); ++i) {
        if (joint[i].size() != header.size()) {
            throw Error(ErrorCode::ParseError, "joint.csv row " + std::to_string(i) + " has the wrong width");
        }
        std::vector<double> v(header.size(), 0.0);
        for (std::size_t c = 2; c < header.size(); ++c) {
            v[c] = parse_number(joint[i][c], "joint.csv row " + std::to_string(i));
        }
        sum_pr += v[3];
        ratio_residual = std::max(ratio_residual, std::abs(v[2] / v[3] - v[4]) / v[4]);
        rows.push_back(std::move(v));
    }
    result.checks.push_back({"ratio_recomputed", ratio_residual, tol.omega_consistency});

    for (const Column& col : columns) {
        const std::string& name = col.family.name();
        double average = 0.0;
        double omega_residual = 0.0;
        for (const auto& v : rows) {
            average += v[2] * col.family.f_inverse(col.family.g(v[col.forward]));
            const double expect = col.family.f(v[4]);
            omega_residual = std::max(omega_residual, std::abs(v[col.forward] - expect) / std::max(1.0, std::abs(expect)));
        }
        result.checks.push_back({"jarzynski[" + name + "]", std::abs(average - sum_pr), tol.jarzynski});
        result.checks.push_back({"omega_recomputed[" + name + "]", omega_residual, tol.omega_consistency});

        std::vector<Atom> fwd;
        std::vector<Atom> rev;
        for (std::size_t i = 1; i < measures.size(); ++i) {
            const auto& m = measures[i];
            if (m.size() != 4 || m[0] != name) continue;
            const Atom a{parse_number(m[2], "measures.csv"), parse_number(m[3], "measures.csv")};
            (m[1] == "forward" ? fwd : rev).push_back(a);
        }
        const CrooksReport crooks =
            crooks_residuals(DiscreteMeasure(std::move(fwd), kMergeTol), DiscreteMeasure(std::move(rev), kMergeTol),
                             col.family);
        result.checks.push_back({"crooks[" + name + "]", crooks.max_residual, tol.crooks});
    }
    return result;
}

}  // namespace retro
