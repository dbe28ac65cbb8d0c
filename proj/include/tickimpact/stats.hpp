#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tickimpact/events.hpp"
#include "tickimpact/imbalance.hpp"

namespace tickimpact {

// Linear-interpolation quantile on a sorted sample (the common "type 7"
// rule): h = (n-1)p, result = x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)]).
double quantile_sorted(const std::vector<double>& sorted, double p);

double sample_mean(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);  // n-1 denominator, 0 for n < 2

// Raw per-episode samples for one grid volume.
struct BinSamples {
    std::vector<double> impacts;        // ticks
    std::vector<int64_t> durations_ns;
    std::vector<double> participations;

    void add(const ImbalanceEpisode& e) {
        impacts.push_back(e.impact_ticks);
        durations_ns.push_back(e.duration_ns());
        participations.push_back(episode_participation(e));
    }
};

struct VolumeBinStats {
    double v = 0.0;
    int64_t n = 0;
    double mean_impact = 0.0;
    double sd_impact = 0.0;
    double q1_impact = 0.0;
    double median_impact = 0.0;
    double q3_impact = 0.0;
    std::vector<double> outliers;              // beyond 1.5 IQR of [q1, q3]
    std::map<int64_t, int64_t> histogram;      // key: impact in half-ticks
    double median_participation = 0.0;
    double mean_duration_s = 0.0;          // raw
    double mean_duration_trimmed_s = 0.0;  // upper outliers (> q3 + 1.5 IQR) removed
    double median_duration_s = 0.0;        // raw
    double zero_time_fraction = 0.0;
    bool low_count = false;  // n below min_count (kept, flagged)
};

VolumeBinStats make_bin_stats(double v, const BinSamples& samples, int64_t min_count = 30);

// Accepted episodes only; one bin per grid point (empty bins flagged with n=0).
std::vector<VolumeBinStats> aggregate_bins(const MultiScanResult& scan, int64_t min_count = 30);

struct RegressionResult {
    double intercept = 0.0;   // mu_I, ticks
    double slope = 0.0;       // lambda_I, Kyle's lambda, ticks per unit v
    double r_squared = 0.0;
    double p_value = 0.0;     // two-sided t test of zero slope
    int64_t n_points = 0;
};

struct RegressionPoint {
    double v = 0.0;
    double mean_impact = 0.0;
    int64_t n = 0;
};

// Ordinary least squares of mean impact on v. Unweighted by default; the
// weighted variant uses the bin counts (not claimed to match any published
// treatment, exposed for exploration).
RegressionResult fit_linear(const std::vector<RegressionPoint>& points, bool weighted = false);

// Two-sided p for a t statistic via the regularized incomplete beta function.
double student_t_p_value(double t, int64_t dof);

// delta/2 estimator, reported in ticks: I_E(v) = 0.5 v.
inline double estimated_impact_ticks(double v) { return 0.5 * v; }
inline double estimated_impact_currency(double v, double tick_size) {
    return 0.5 * v * tick_size;
}

// Percentage gap between a fitted slope and the delta/2 estimate.
inline double lambda_error_pct(double lambda_ticks) {
    return std::abs(lambda_ticks - 0.5) / 0.5 * 100.0;
}

struct ParticipationCurve {
    std::vector<std::pair<double, double>> points;  // (v, median participation)
    double asymptote = 0.0;                         // median at the largest populated v
};

ParticipationCurve participation_curve(const std::vector<VolumeBinStats>& bins);

// ----- artifact io -----

void write_bins_csv(const std::string& path, const std::vector<VolumeBinStats>& bins);
std::vector<VolumeBinStats> read_bins_csv(const std::string& path);

// Regression summary, key = value lines.
struct AnalysisSummary {
    std::string instrument;
    double tick_size = 0.0;
    double touch_volume = 0.0;
    int64_t n_events = 0;
    int64_t n_trades = 0;
    int64_t n_episodes_accepted = 0;
    int64_t n_episodes_rejected = 0;
    int64_t n_episodes_dropped = 0;
    std::optional<RegressionResult> fit;
    double part_rate_asymptote = 0.0;
};

void write_summary(const std::string& path, const AnalysisSummary& summary);
AnalysisSummary read_summary(const std::string& path);

}  // namespace tickimpact
