#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tickimpact/events.hpp"
#include "tickimpact/imbalance.hpp"
#include "tickimpact/stats.hpp"

namespace tickimpact {

struct AnalysisOptions {
    double v_max = 5.0;
    double v_step = 0.25;
    double overshoot_tol = 0.1;
    int64_t min_bin_count = 30;
    int64_t fit_min_count = 1;  // bins below this are excluded from the fit
    bool weighted_fit = false;
    bool require_post_quote = true;
};

// Full pipeline result for one session: touch volume, fused scan over the
// grid, per-volume bins, the linear fit and the participation curve.
struct AnalysisResult {
    SessionDescriptor descriptor;
    double touch_volume = 0.0;
    MultiScanResult scan;
    std::vector<VolumeBinStats> bins;
    std::optional<RegressionResult> fit;
    ParticipationCurve curve;
    std::vector<std::string> warnings;

    AnalysisSummary summary() const;
};

AnalysisResult analyze_events(const std::vector<Level1Event>& events,
                              const SessionDescriptor& descriptor,
                              const AnalysisOptions& options);

AnalysisResult analyze_file(const std::string& ticks_path, const std::string& descriptor_path,
                            const AnalysisOptions& options);

// Writes episodes.csv, bins.csv and summary.txt into out_dir.
void write_analysis_outputs(const AnalysisResult& result, const std::string& out_dir);

}  // namespace tickimpact
