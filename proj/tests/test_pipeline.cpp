#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "tickimpact/analyze.hpp"
#include "tickimpact/report.hpp"
#include "tickimpact/simulator.hpp"
#include "tickimpact/tick_file.hpp"

using namespace tickimpact;

namespace {

std::filesystem::path temp_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(dir);
    return dir;
}

SimConfig idealized_config(uint64_t seed, int episodes) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.instrument = "IDEAL";
    cfg.session_length_s = 4.0 * (episodes + 2);
    cfg.noise_rate_per_side = 1e-5;
    cfg.touch_target = 14;
    cfg.requote_inside = false;
    InformedConfig inf;
    inf.style = InformedConfig::Style::Aggressive;
    inf.target_vt = 14;
    inf.spacing_s = 4.0;
    inf.direction = InformedConfig::Direction::Buy;
    cfg.informed = inf;
    return cfg;
}

AnalysisOptions integer_grid_options() {
    AnalysisOptions options;
    options.v_max = 5.0;
    options.v_step = 1.0;
    options.min_bin_count = 10;
    return options;
}

}  // namespace

TEST_CASE("pipeline on the idealized session recovers the half-tick slope exactly") {
    SimConfig cfg = idealized_config(1001, 200);
    SimSession session = generate_session(cfg);

    AnalysisResult result = analyze_events(session.events, cfg.descriptor(),
                                           integer_grid_options());
    CHECK(result.touch_volume == doctest::Approx(14.0).epsilon(1e-9));
    REQUIRE(result.fit.has_value());
    CHECK(result.fit->slope == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(result.fit->intercept) < 1e-6);
    CHECK(result.fit->r_squared > 0.9999);
    CHECK(result.curve.asymptote == doctest::Approx(1.0));

    // every populated bin sits on the I = v/2 line with no spread
    for (const VolumeBinStats& bin : result.bins) {
        REQUIRE(bin.n > 10);
        CHECK(bin.mean_impact == doctest::Approx(0.5 * bin.v).epsilon(1e-9));
        CHECK(bin.sd_impact == doctest::Approx(0.0));
    }
}

TEST_CASE("a quote-only session analyzes to empty bins with a warning") {
    std::vector<Level1Event> events{Level1Event::quote(0, 100.00, 100.01, 5, 5)};
    SessionDescriptor desc{"EMPTY", 0.01, 0, 1'000'000'000};
    AnalysisResult result = analyze_events(events, desc, AnalysisOptions{});
    CHECK(!result.fit.has_value());
    CHECK(!result.warnings.empty());
    for (const VolumeBinStats& bin : result.bins) CHECK(bin.n == 0);
    CHECK(result.touch_volume == doctest::Approx(5.0));
}

TEST_CASE("a session with no quotes at all analyzes to a warning and no touch") {
    std::vector<Level1Event> events;
    SessionDescriptor desc{"NONE", 0.01, 0, 1'000'000'000};
    AnalysisResult result = analyze_events(events, desc, AnalysisOptions{});
    CHECK(!result.fit.has_value());
    CHECK(result.touch_volume == 0.0);
    REQUIRE(!result.warnings.empty());
}

TEST_CASE("v-max truncates the grid like the shorter published charts") {
    SimConfig cfg = idealized_config(1002, 60);
    SimSession session = generate_session(cfg);
    AnalysisOptions options;
    options.v_max = 2.5;
    options.v_step = 0.25;
    AnalysisResult result = analyze_events(session.events, cfg.descriptor(), options);
    REQUIRE(result.scan.v_grid.size() == 10);
    CHECK(result.scan.v_grid.back() == doctest::Approx(2.5));
}

TEST_CASE("analysis outputs are written and re-parseable") {
    SimConfig cfg = idealized_config(1003, 80);
    SimSession session = generate_session(cfg);
    AnalysisResult result = analyze_events(session.events, cfg.descriptor(),
                                           integer_grid_options());

    auto dir = temp_dir("tickimpact_outputs_test");
    write_analysis_outputs(result, dir.string());

    auto episodes = read_episodes_csv((dir / "episodes.csv").string());
    int64_t expected = 0;
    for (const auto& eps : result.scan.episodes) expected += static_cast<int64_t>(eps.size());
    CHECK(static_cast<int64_t>(episodes.size()) == expected);

    auto bins = read_bins_csv((dir / "bins.csv").string());
    CHECK(bins.size() == result.bins.size());

    AnalysisSummary summary = read_summary((dir / "summary.txt").string());
    CHECK(summary.instrument == "IDEAL");
    REQUIRE(summary.fit.has_value());
    CHECK(summary.fit->slope == doctest::Approx(result.fit->slope));

    std::filesystem::remove_all(dir);
}

TEST_CASE("analyze_file matches analyze_events on the same session") {
    SimConfig cfg = idealized_config(1004, 50);
    SimSession session = generate_session(cfg);

    auto dir = temp_dir("tickimpact_file_vs_mem");
    std::string ticks = (dir / "session.csv").string();
    std::string desc = (dir / "session.desc").string();
    write_tick_file(ticks, session.events);
    write_descriptor(desc, cfg.descriptor());

    AnalysisResult from_file = analyze_file(ticks, desc, integer_grid_options());
    AnalysisResult from_mem = analyze_events(session.events, cfg.descriptor(),
                                             integer_grid_options());
    CHECK(from_file.touch_volume == from_mem.touch_volume);
    REQUIRE(from_file.fit.has_value());
    CHECK(from_file.fit->slope == from_mem.fit->slope);
    CHECK(from_file.fit->intercept == from_mem.fit->intercept);
    CHECK(from_file.scan.counters.events == from_mem.scan.counters.events);

    std::filesystem::remove_all(dir);
}

TEST_CASE("report rows carry the published-style lambda error and concave flag") {
    AnalysisSummary s;
    s.instrument = "CLC1LIKE";
    s.tick_size = 0.01;
    s.touch_volume = 14.2;
    RegressionResult fit;
    fit.intercept = 0.05;
    fit.slope = 0.64;
    fit.r_squared = 0.997;
    fit.p_value = 1.2e-40;
    fit.n_points = 20;
    s.fit = fit;
    s.part_rate_asymptote = 0.21;

    ReportRow row = report_row(s);
    CHECK(row.lambda_err_pct == doctest::Approx(28.0).epsilon(1e-9));
    CHECK(!row.concave);

    s.fit->intercept = 0.52;
    row = report_row(s);
    CHECK(row.concave);
}

TEST_CASE("table csv has the exact interface header and round-trips") {
    AnalysisSummary s;
    s.instrument = "A";
    s.tick_size = 0.01;
    s.touch_volume = 10.0;
    RegressionResult fit;
    fit.intercept = 0.1;
    fit.slope = 0.55;
    fit.r_squared = 0.99;
    fit.p_value = 1e-12;
    fit.n_points = 20;
    s.fit = fit;
    s.part_rate_asymptote = 0.3;

    auto dir = temp_dir("tickimpact_table_test");
    std::string path = (dir / "table.csv").string();
    write_table_csv(path, {report_row(s)});

    std::FILE* f = std::fopen(path.c_str(), "rb");
    REQUIRE(f);
    char line[256] = {0};
    REQUIRE(std::fgets(line, sizeof(line), f));
    std::fclose(f);
    CHECK(std::string(line) == "RIC,touch,delta,mu,lambda,lambda_err_pct,r2,p_value,part_rate\n");

    auto rows = read_table_csv(path);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ric == "A");
    CHECK(rows[0].lambda == 0.55);
    CHECK(rows[0].part_rate == 0.3);

    std::filesystem::remove_all(dir);
}

TEST_CASE("build_report reads analysis directories and keeps input order") {
    auto dir_a = temp_dir("tickimpact_report_a");
    auto dir_b = temp_dir("tickimpact_report_b");
    for (auto [dir, name, slope] :
         {std::tuple{dir_a, "INST_A", 0.5}, std::tuple{dir_b, "INST_B", 1.1}}) {
        AnalysisSummary s;
        s.instrument = name;
        s.tick_size = 0.01;
        s.touch_volume = 12.0;
        RegressionResult fit;
        fit.slope = slope;
        fit.intercept = 0.0;
        fit.r_squared = 0.95;
        fit.p_value = 1e-9;
        fit.n_points = 20;
        s.fit = fit;
        write_summary((dir / "summary.txt").string(), s);
    }
    auto rows = build_report({dir_a.string(), dir_b.string()});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ric == "INST_A");
    CHECK(rows[1].ric == "INST_B");
    CHECK(rows[1].lambda_err_pct == doctest::Approx(120.0).epsilon(1e-9));
    CHECK_THROWS_AS((void)build_report({}), TickError);
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}
