// Command-line front end: run, reverse, verify and batch over scenario files.

#include <algorithm>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "retro/pipeline.hpp"
#include "retro/scenario_file.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitViolation = 2;

nlohmann::json error_json(const retro::Error& e) {
    return {{"error", {{"code", std::string(retro::to_string(e.code()))}, {"message", e.what()}}}};
}

nlohmann::json error_json(const std::exception& e) {
    return {{"error", {{"code", "InternalError"}, {"message", e.what()}}}};
}

struct Outcome {
    int code = kExitOk;
    nlohmann::json body;
};

Outcome run_one(const std::string& file, const std::string& out, const retro::RunOptions& options) {
    try {
        const retro::ScenarioFile sf = retro::parse_scenario_file(file);
        const retro::RunReport report = retro::run_pipeline(sf, out, options);
        nlohmann::json failed = nlohmann::json::array();
        for (const auto& c : report.identities) {
            if (!c.pass()) failed.push_back(c.name);
        }
        return {report.ok() ? kExitOk : kExitViolation,
                {{"file", file}, {"out", out}, {"ok", report.ok()}, {"failed", failed}}};
    } catch (const retro::Error& e) {
        auto body = error_json(e);
        body["file"] = file;
        return {kExitInput, body};
    } catch (const std::exception& e) {
        auto body = error_json(e);
        body["file"] = file;
        return {kExitInput, body};
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian retrodiction and fluctuation-relation toolkit"};
    app.require_subcommand(1);

    std::string file;
    std::string out;
    std::uint64_t seed = 0;
    double tol = 0.0;
    bool plot = false;

    auto* run = app.add_subcommand("run", "Build a scenario and write joint.csv, measures.csv and summary.json");
    run->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override the file's seed");
    auto* tol_opt = run->add_option("--tol", tol, "Use one tolerance for every identity")->check(CLI::PositiveNumber);
    run->add_flag("--plot", plot, "Also write plot_<i>.svg per family");

    auto* reverse = app.add_subcommand("reverse", "Print the reverse channel and its reference distribution");
    reverse->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
    auto* reverse_seed = reverse->add_option("--seed", seed, "Override the file's seed");

    auto* verify = app.add_subcommand("verify", "Recheck residuals from the CSV files of a run");
    verify->add_option("dir", out, "Run output directory")->required()->check(CLI::ExistingDirectory);
    auto* verify_tol = verify->add_option("--tol", tol, "Use one tolerance for every identity")->check(CLI::PositiveNumber);

    std::string in_dir;
    auto* batch = app.add_subcommand("batch", "Run every *.json file of a directory concurrently");
    batch->add_option("dir", in_dir, "Directory of scenario files")->required()->check(CLI::ExistingDirectory);
    batch->add_option("--out", out, "Output root; each file gets a subdirectory named after it")->required();
    auto* batch_tol = batch->add_option("--tol", tol, "Use one tolerance for every identity")->check(CLI::PositiveNumber);
    batch->add_flag("--plot", plot, "Also write SVG plots");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        retro::RunOptions options;
        if (seed_opt->count()) options.seed = seed;
        if (tol_opt->count()) options.tol = tol;
        options.plot = plot;
        const Outcome o = run_one(file, out, options);
        (o.code == kExitInput ? std::cerr : std::cout) << o.body.dump() << "\n";
        return o.code;
    }

    if (reverse->parsed()) {
        try {
            const retro::ScenarioFile sf = retro::parse_scenario_file(file);
            const std::uint64_t s = reverse_seed->count() ? seed : sf.seed;
            const retro::ScenarioRun r = retro::build_scenario(retro::resolve_config(sf, s), s);
            std::cout << retro::reverse_summary(r).dump(2) << "\n";
            return kExitOk;
        } catch (const retro::Error& e) {
            std::cerr << error_json(e).dump() << "\n";
            return kExitInput;
        }
    }

    if (verify->parsed()) {
        try {
            const retro::Tolerances t = verify_tol->count() ? retro::Tolerances::uniform(tol) : retro::Tolerances{};
            const retro::VerifyResult v = retro::verify_outputs(out, t);
            nlohmann::json checks = nlohmann::json::array();
            for (const auto& c : v.checks) {
                checks.push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance},
                                  {"pass", c.pass()}});
            }
            std::cout << nlohmann::json{{"ok", v.ok()}, {"checks", checks}}.dump(2) << "\n";
            return v.ok() ? kExitOk : kExitViolation;
        } catch (const retro::Error& e) {
            std::cerr << error_json(e).dump() << "\n";
            return kExitInput;
        }
    }

    // batch
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    retro::RunOptions options;
    if (batch_tol->count()) options.tol = tol;
    options.plot = plot;
    std::vector<std::future<Outcome>> jobs;
    for (const auto& f : files) {
        const std::string target = (std::filesystem::path(out) / f.stem()).string();
        jobs.push_back(std::async(std::launch::async, run_one, f.string(), target, options));
    }
    int code = kExitOk;
    nlohmann::json results = nlohmann::json::array();
    for (auto& job : jobs) {
        Outcome o = job.get();
        if (o.code == kExitInput || (o.code == kExitViolation && code == kExitOk)) code = o.code;
        results.push_back(std::move(o.body));
    }
    std::cout << results.dump(2) << "\n";
    return code;
}
