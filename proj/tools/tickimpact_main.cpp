// Command-line front end: simulate a synthetic session, analyze a tick file,
// or combine analysis summaries into a multi-instrument table.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tickimpact/analyze.hpp"
#include "tickimpact/report.hpp"
#include "tickimpact/simulator.hpp"
#include "tickimpact/tick_file.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;

int exit_code_for(const tickimpact::TickError& err) {
    switch (err.code()) {
        case tickimpact::ErrorCode::ConfigInvalid:
        case tickimpact::ErrorCode::IoError:
            return kExitConfigError;
        default:
            return kExitDataError;
    }
}

int run_simulate(const std::string& config_path, const std::string& out_dir) {
    tickimpact::SimConfig config = tickimpact::read_sim_config(config_path);
    std::filesystem::create_directories(out_dir);

    int64_t executed = 0;
    int64_t n_events = 0;
    auto truth = tickimpact::generate_session_to_file(config, out_dir + "/session.csv",
                                                      &executed, &n_events);
    tickimpact::write_descriptor(out_dir + "/session.desc", config.descriptor());
    tickimpact::write_truth_csv(out_dir + "/truth.csv", truth);

    std::printf("simulated %s: %lld events, %lld contracts executed, %zu informed episodes\n",
                config.instrument.c_str(), static_cast<long long>(n_events),
                static_cast<long long>(executed), truth.size());
    std::printf("wrote %s/session.csv, session.desc, truth.csv\n", out_dir.c_str());
    return kExitOk;
}

int run_analyze(const std::string& ticks_path, const std::string& desc_path,
                const std::string& out_dir, const tickimpact::AnalysisOptions& options) {
    tickimpact::AnalysisResult result = tickimpact::analyze_file(ticks_path, desc_path, options);
    tickimpact::write_analysis_outputs(result, out_dir);

    for (const std::string& warning : result.warnings)
        std::printf("warning: %s\n", warning.c_str());

    std::printf("instrument %s: %lld events, %lld trades, touch volume %.3f contracts\n",
                result.descriptor.instrument.c_str(),
                static_cast<long long>(result.scan.counters.events),
                static_cast<long long>(result.scan.counters.trades), result.touch_volume);
    if (result.fit) {
        std::printf("I = %.4f + %.4f v  (ticks)\n", result.fit->intercept, result.fit->slope);
        std::printf("lambda_err = %.1f%%  R^2 = %.4f  p = %.3g\n",
                    tickimpact::lambda_error_pct(result.fit->slope), result.fit->r_squared,
                    result.fit->p_value);
        std::printf("participation asymptote = %.1f%%\n", result.curve.asymptote * 100.0);
    }
    std::printf("wrote %s/episodes.csv, bins.csv, summary.txt\n", out_dir.c_str());
    return kExitOk;
}

int run_report(const std::vector<std::string>& in_dirs, const std::string& out_path) {
    std::vector<tickimpact::ReportRow> rows = tickimpact::build_report(in_dirs);
    tickimpact::write_table_csv(out_path, rows);
    for (const tickimpact::ReportRow& row : rows) {
        std::printf("%s: mu=%.2f lambda=%.2f lambda_err=%.1f%% R^2=%.3f part=%.1f%%%s\n",
                    row.ric.c_str(), row.mu, row.lambda, row.lambda_err_pct, row.r2,
                    row.part_rate * 100.0, row.concave ? "  [concave]" : "");
    }
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tick-data toolkit: trade-imbalance market impact analytics"};
    app.require_subcommand(1);

    std::string config_path, out_dir, ticks_path, desc_path, out_file;
    std::vector<std::string> in_dirs;
    tickimpact::AnalysisOptions options;

    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic session");
    simulate->add_option("--config", config_path, "simulator config file")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();

    CLI::App* analyze = app.add_subcommand("analyze", "run the impact pipeline on a session");
    analyze->add_option("--ticks", ticks_path, "canonical tick file")->required();
    analyze->add_option("--desc", desc_path, "session descriptor")->required();
    analyze->add_option("--out", out_dir, "output directory")->required();
    analyze->add_option("--v-max", options.v_max, "largest normalized volume");
    analyze->add_option("--v-step", options.v_step, "grid step");
    analyze->add_option("--overshoot", options.overshoot_tol, "overshoot tolerance");
    analyze->add_option("--min-bin-count", options.min_bin_count, "low-count flag threshold");
    analyze->add_flag("--weighted-fit", options.weighted_fit, "weight the fit by bin counts");

    CLI::App* report = app.add_subcommand("report", "combine analyses into one table");
    report->add_option("--in", in_dirs, "analysis output directories")->required();
    report->add_option("--out", out_file, "table csv path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (simulate->parsed()) return run_simulate(config_path, out_dir);
        if (analyze->parsed()) return run_analyze(ticks_path, desc_path, out_dir, options);
        if (report->parsed()) return run_report(in_dirs, out_file);
    } catch (const tickimpact::TickError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDataError;
    }
    return kExitOk;
}
