#include "tickimpact/analyze.hpp"

#include <filesystem>

#include "tickimpact/tick_file.hpp"

namespace tickimpact {

namespace {

ExtractionConfig extraction_config(const AnalysisOptions& options, double touch_volume) {
    ExtractionConfig cfg;
    cfg.overshoot_tol = options.overshoot_tol;
    cfg.v_grid = default_v_grid(options.v_max, options.v_step);
    cfg.touch_volume = touch_volume;
    cfg.require_post_quote = options.require_post_quote;
    return cfg;
}

MultiScanResult scan_reduced(const ReducedSession& reduced, const SessionDescriptor& descriptor,
                             const ExtractionConfig& cfg) {
    MultiScanResult result;
    result.v_grid = cfg.v_grid;
    result.counters = reduced.counters;
    result.touch_volume = cfg.touch_volume;
    result.targets.reserve(result.v_grid.size());
    for (double v : result.v_grid) result.targets.push_back(target_from_v(v, cfg.touch_volume));
    result.episodes.assign(result.v_grid.size(), {});
    result.target_counters = scan_trades(
        reduced.trades, result.targets, descriptor.tick_size, cfg,
        [&result](size_t idx, const ImbalanceEpisode& e) { result.episodes[idx].push_back(e); });
    return result;
}

AnalysisResult analyze_reduced(ReducedSession&& reduced, const SessionDescriptor& descriptor,
                               const AnalysisOptions& options) {
    AnalysisResult result;
    result.descriptor = descriptor;

    if (!reduced.touch.has_samples()) {
        result.warnings.push_back("no two-sided quotes in session; nothing to analyze");
        result.scan.counters = reduced.counters;
        result.scan.v_grid = default_v_grid(options.v_max, options.v_step);
        result.scan.episodes.assign(result.scan.v_grid.size(), {});
        result.scan.target_counters.assign(result.scan.v_grid.size(), {});
        result.bins = aggregate_bins(result.scan, options.min_bin_count);
        return result;
    }

    result.touch_volume = reduced.touch.value();
    ExtractionConfig cfg = extraction_config(options, result.touch_volume);
    result.scan = scan_reduced(reduced, descriptor, cfg);

    if (reduced.trades.empty())
        result.warnings.push_back("no classifiable trades in session; bins are empty");

    result.bins = aggregate_bins(result.scan, options.min_bin_count);

    std::vector<RegressionPoint> points;
    for (const VolumeBinStats& b : result.bins) {
        if (b.n >= options.fit_min_count && b.n > 0)
            points.push_back({b.v, b.mean_impact, b.n});
    }
    if (points.size() >= 3) {
        result.fit = fit_linear(points, options.weighted_fit);
    } else {
        result.warnings.push_back("fewer than 3 populated bins; regression skipped");
    }

    result.curve = participation_curve(result.bins);
    return result;
}

}  // namespace

AnalysisResult analyze_events(const std::vector<Level1Event>& events,
                              const SessionDescriptor& descriptor,
                              const AnalysisOptions& options) {
    descriptor.validate();
    SpanSource source(events);
    return analyze_reduced(reduce_session(source, descriptor), descriptor, options);
}

AnalysisResult analyze_file(const std::string& ticks_path, const std::string& descriptor_path,
                            const AnalysisOptions& options) {
    SessionDescriptor descriptor = read_descriptor(descriptor_path);
    TickFileReader reader(ticks_path);
    return analyze_reduced(reduce_session(reader, descriptor), descriptor, options);
}

AnalysisSummary AnalysisResult::summary() const {
    AnalysisSummary s;
    s.instrument = descriptor.instrument;
    s.tick_size = descriptor.tick_size;
    s.touch_volume = touch_volume;
    s.n_events = scan.counters.events;
    s.n_trades = scan.counters.trades;
    for (const TargetCounters& c : scan.target_counters) {
        s.n_episodes_accepted += c.accepted;
        s.n_episodes_rejected += c.rejected_overshoot;
        s.n_episodes_dropped += c.dropped_no_post_quote;
    }
    s.fit = fit;
    s.part_rate_asymptote = curve.asymptote;
    return s;
}

void write_analysis_outputs(const AnalysisResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_episodes_csv(out_dir + "/episodes.csv", result.scan);
    write_bins_csv(out_dir + "/bins.csv", result.bins);
    write_summary(out_dir + "/summary.txt", result.summary());
}

}  // namespace tickimpact
