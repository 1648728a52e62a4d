#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "retro/pipeline.hpp"
#include "retro/plot.hpp"
#include "retro/scenario_file.hpp"

using namespace retro;
namespace fs = std::filesystem;

namespace {

template <typename Fn>
Error error_of(Fn fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "expected an Error";
    return Error(ErrorCode::InvalidArgument, "none");
}

fs::path examples_dir() { return fs::path(RETRO_SOURCE_DIR) / "examples_scenarios"; }

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("retro_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

const char* kClassical = R"({
  "schema_version": 1,
  "kind": "classical",
  "parameters": {
    "channel": [[0.9, 0.1], [0.2, 0.8]],
    "p": [0.5, 0.5],
    "q": [0.3, 0.7]
  }
})";

}  // namespace

TEST(ScenarioFile, EveryExampleParsesAndRuns) {
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(examples_dir())) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        SCOPED_TRACE(entry.path().string());
        const ScenarioFile file = parse_scenario_file(entry.path());
        const fs::path out = fresh_dir("example_" + entry.path().stem().string());
        const RunReport report = run_pipeline(file, out);
        EXPECT_TRUE(report.ok());
        EXPECT_TRUE(verify_outputs(out).ok());
    }
    EXPECT_GE(seen, 7u);
}

TEST(ScenarioFile, KindsAreListed) {
    const auto kinds = scenario_kinds();
    for (const char* k : {"classical", "tasaki", "deterministic", "jarz2000", "crooks_relaxation", "two_measurement",
                          "random"}) {
        EXPECT_NE(std::find(kinds.begin(), kinds.end(), k), kinds.end()) << k;
    }
}

TEST(ScenarioFile, NonStochasticRowNamesTheRow) {
    std::string text = kClassical;
    text.replace(text.find("[0.2, 0.8]"), 10, "[0.2, 0.9]");
    const Error e = error_of([&] { parse_scenario_text(text); });
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
    EXPECT_NE(std::string(e.what()).find("[1]"), std::string::npos) << e.what();
}

TEST(ScenarioFile, UnsupportedVersion) {
    std::string text = kClassical;
    text.replace(text.find("\"schema_version\": 1"), 19, "\"schema_version\": 999");
    EXPECT_EQ(error_of([&] { parse_scenario_text(text); }).code(), ErrorCode::VersionError);
}

TEST(ScenarioFile, UnknownFieldIsRejected) {
    std::string text = kClassical;
    text.replace(text.find("\"p\":"), 4, "\"prior\": 1, \"p\":");
    const Error e = error_of([&] { parse_scenario_text(text); });
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
    EXPECT_NE(std::string(e.what()).find("prior"), std::string::npos) << e.what();
}

TEST(ScenarioFile, MalformedJson) {
    EXPECT_EQ(error_of([] { parse_scenario_text("{\"schema_version\": 1,"); }).code(), ErrorCode::ParseError);
}

TEST(ScenarioFile, UnknownKind) {
    std::string text = kClassical;
    text.replace(text.find("classical"), 9, "nonsense");
    EXPECT_EQ(error_of([&] { parse_scenario_text(text); }).code(), ErrorCode::SchemaError);
}

TEST(ScenarioFile, MissingFileIsIoError) {
    EXPECT_EQ(error_of([] { parse_scenario_file("/nonexistent/scenario.json"); }).code(), ErrorCode::IoError);
}

TEST(ScenarioFile, FamilyObjectsAndStrings) {
    std::string text = kClassical;
    text.insert(text.rfind('}'), R"(, "f_families": ["power:2", {"kind": "log", "parameter": 0.5}])");
    const ScenarioFile f = parse_scenario_text(text);
    ASSERT_EQ(f.f_families.size(), 2u);
    EXPECT_EQ(f.f_families[0].kind(), FKind::power);
    EXPECT_EQ(f.f_families[1].kind(), FKind::log);
    EXPECT_DOUBLE_EQ(f.f_families[1].parameter(), 0.5);
}

TEST(Pipeline, OutputsAreWrittenAndVerified) {
    const ScenarioFile file = parse_scenario_text(kClassical);
    const fs::path out = fresh_dir("classical");
    RunOptions opt;
    opt.plot = true;
    const RunReport report = run_pipeline(file, out, opt);
    EXPECT_TRUE(report.ok());
    for (const char* name : {"joint.csv", "measures.csv", "summary.json", "plot_0.svg"}) {
        EXPECT_TRUE(fs::exists(out / name)) << name;
    }
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_EQ(summary.at("kind"), "classical");
    // 2 x 2 fully supported joint table plus the header.
    EXPECT_EQ(count(slurp(out / "joint.csv"), "\n"), 5u);
    EXPECT_TRUE(verify_outputs(out).ok());
}

TEST(Pipeline, TamperedOutputsFailVerification) {
    const fs::path out = fresh_dir("tampered");
    run_pipeline(parse_scenario_text(kClassical), out);
    std::string joint = slurp(out / "joint.csv");
    // Shift the first P_F entry; the ratio column no longer matches.
    const auto header_end = joint.find('\n');
    const auto pf = joint.find(',', joint.find(',', header_end + 1) + 1) + 1;
    joint.replace(pf, joint.find(',', pf) - pf, "0.46");
    std::ofstream(out / "joint.csv", std::ios::binary) << joint;
    EXPECT_FALSE(verify_outputs(out).ok());
}

TEST(Pipeline, RepeatedRunsAreByteIdentical) {
    const ScenarioFile file = parse_scenario_file(examples_dir() / "random_quantum.json");
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    run_pipeline(file, a);
    run_pipeline(file, b);
    for (const char* name : {"joint.csv", "measures.csv", "summary.json"}) {
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    }
}

TEST(Pipeline, SeedOverrideChangesRandomScenario) {
    const ScenarioFile file = parse_scenario_file(examples_dir() / "random_quantum.json");
    const fs::path a = fresh_dir("seed_a");
    const fs::path b = fresh_dir("seed_b");
    RunOptions opt;
    opt.seed = 12345;
    run_pipeline(file, a);
    run_pipeline(file, b, opt);
    EXPECT_NE(slurp(a / "joint.csv"), slurp(b / "joint.csv"));
}

TEST(Plot, SingleAtomMeasureHasOneStemEachWay) {
    const DiscreteMeasure m({Atom{0.0, 1.0}}, kMergeTol);
    const std::string svg = render_plot(m, m, "trivial");
    EXPECT_EQ(count(svg, "class=\"stem forward\""), 1u);
    EXPECT_EQ(count(svg, "class=\"stem reverse\""), 1u);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
}

TEST(Plot, TasakiHasFourStemsEachWay) {
    const ScenarioFile file = parse_scenario_file(examples_dir() / "tasaki_qubit.json");
    const fs::path out = fresh_dir("plot_tasaki");
    RunOptions opt;
    opt.plot = true;
    run_pipeline(file, out, opt);
    const std::string svg = slurp(out / "plot_0.svg");
    EXPECT_EQ(count(svg, "class=\"stem forward\""), 4u);
    EXPECT_EQ(count(svg, "class=\"stem reverse\""), 4u);
}

TEST(Plot, EmptyMeasureWritesNothing) {
    const fs::path dir = fresh_dir("plot_empty");
    fs::create_directories(dir);
    const DiscreteMeasure empty;
    EXPECT_EQ(error_of([&] { emit_plot(empty, empty, dir / "p.svg"); }).code(), ErrorCode::InvalidArgument);
    EXPECT_FALSE(fs::exists(dir / "p.svg"));
}

TEST(Format, RoundTripsDoubles) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Format, Fnv1a64KnownValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
