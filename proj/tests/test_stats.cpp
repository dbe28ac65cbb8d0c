#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "reference/tdist_quadrature.hpp"
#include "tickimpact/stats.hpp"
#include "tickimpact/tick_file.hpp"

using namespace tickimpact;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// Naive quantile oracle: sort and interpolate, written independently.
double naive_quantile(std::vector<double> xs, double p) {
    std::sort(xs.begin(), xs.end());
    if (xs.size() == 1) return xs[0];
    double pos = p * (static_cast<double>(xs.size()) - 1.0);
    size_t below = static_cast<size_t>(std::floor(pos));
    size_t above = static_cast<size_t>(std::ceil(pos));
    if (above >= xs.size()) return xs.back();
    double w = pos - std::floor(pos);
    return (1.0 - w) * xs[below] + w * xs[above];
}

// Uncentered normal-equations OLS, the closed-form oracle.
void normal_equations(const std::vector<RegressionPoint>& pts, long double& slope,
                      long double& intercept, long double& r2, long double& tstat) {
    long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : pts) {
        n += 1;
        sx += p.v;
        sy += p.mean_impact;
        sxx += static_cast<long double>(p.v) * p.v;
        sxy += static_cast<long double>(p.v) * p.mean_impact;
        syy += static_cast<long double>(p.mean_impact) * p.mean_impact;
    }
    long double den = n * sxx - sx * sx;
    slope = (n * sxy - sx * sy) / den;
    intercept = (sy - slope * sx) / n;
    long double sse = 0;
    for (const auto& p : pts) {
        long double r = p.mean_impact - (intercept + slope * p.v);
        sse += r * r;
    }
    long double sst = syy - sy * sy / n;
    r2 = sst > 0 ? 1.0L - sse / sst : 1.0L;
    long double s2 = sse / (n - 2);
    long double sxx_c = sxx - sx * sx / n;
    tstat = slope / std::sqrt(static_cast<double>(s2 / sxx_c));
}

}  // namespace

TEST_CASE("quantiles: interpolation on {0, 0.5, 1, 3}") {
    std::vector<double> xs{0.0, 0.5, 1.0, 3.0};
    CHECK(quantile_sorted(xs, 0.25) == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(quantile_sorted(xs, 0.5) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(quantile_sorted(xs, 0.75) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("quantiles match a naive sort-and-interpolate oracle") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 1 + rng() % 40;
        std::vector<double> xs(n);
        for (double& x : xs) x = val(rng);
        std::vector<double> sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        for (double p : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
            CHECK(quantile_sorted(sorted, p) ==
                  doctest::Approx(naive_quantile(xs, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("bin stats: constant impacts have zero spread") {
    BinSamples samples;
    for (int i = 0; i < 3; ++i) {
        samples.impacts.push_back(0.5);
        samples.durations_ns.push_back(1'000'000'000);
        samples.participations.push_back(1.0);
    }
    VolumeBinStats bin = make_bin_stats(1.0, samples);
    CHECK(bin.n == 3);
    CHECK(bin.mean_impact == doctest::Approx(0.5));
    CHECK(bin.sd_impact == doctest::Approx(0.0));
    CHECK(bin.low_count);  // 3 < 30
    CHECK(bin.histogram.at(1) == 3);  // 0.5 ticks -> key 1 half-tick
}

TEST_CASE("bin stats: fence flags only points beyond 1.5 IQR") {
    BinSamples samples;
    for (double x : {0.0, 0.5, 1.0, 3.0}) {
        samples.impacts.push_back(x);
        samples.durations_ns.push_back(0);
        samples.participations.push_back(0.5);
    }
    VolumeBinStats bin = make_bin_stats(2.0, samples);
    // q1 = 0.375, q3 = 1.5, IQR = 1.125, upper fence = 3.1875: 3.0 stays in
    CHECK(bin.q1_impact == doctest::Approx(0.375));
    CHECK(bin.q3_impact == doctest::Approx(1.5));
    CHECK(bin.outliers.empty());
    CHECK(bin.zero_time_fraction == doctest::Approx(1.0));

    samples.impacts.push_back(30.0);  // far beyond any fence
    samples.durations_ns.push_back(0);
    samples.participations.push_back(0.5);
    bin = make_bin_stats(2.0, samples);
    REQUIRE(bin.outliers.size() == 1);
    CHECK(bin.outliers[0] == doctest::Approx(30.0));
}

TEST_CASE("bin stats: histogram counts sum to n") {
    std::mt19937_64 rng(11);
    BinSamples samples;
    for (int i = 0; i < 500; ++i) {
        samples.impacts.push_back(0.5 * static_cast<double>(static_cast<int>(rng() % 9) - 4));
        samples.durations_ns.push_back(static_cast<int64_t>(rng() % 5'000'000'000));
        samples.participations.push_back(0.1 + 0.9 * static_cast<double>(rng() % 100) / 100.0);
    }
    VolumeBinStats bin = make_bin_stats(1.0, samples);
    int64_t total = 0;
    for (const auto& [key, count] : bin.histogram) total += count;
    CHECK(total == bin.n);
    CHECK(bin.q1_impact <= bin.median_impact);
    CHECK(bin.median_impact <= bin.q3_impact);
    CHECK(bin.sd_impact >= 0.0);
}

TEST_CASE("bin stats: trimmed duration mean drops upper outliers, medians stay raw") {
    BinSamples samples;
    std::vector<int64_t> durations{1, 2, 2, 3, 3, 3, 4, 4, 1000};  // seconds
    for (int64_t d : durations) {
        samples.impacts.push_back(0.5);
        samples.durations_ns.push_back(d * 1'000'000'000);
        samples.participations.push_back(0.5);
    }
    VolumeBinStats bin = make_bin_stats(2.0, samples);
    CHECK(bin.median_duration_s == doctest::Approx(3.0));
    CHECK(bin.mean_duration_s > 100.0);          // raw mean dominated by the outlier
    CHECK(bin.mean_duration_trimmed_s < 4.0);    // trimmed mean is not
    CHECK(bin.mean_duration_trimmed_s == doctest::Approx(22.0 / 8.0));
}

TEST_CASE("fit: points exactly on I = 0.5 v") {
    std::vector<RegressionPoint> pts;
    for (int i = 1; i <= 6; ++i)
        pts.push_back({0.5 * i, 0.25 * i, 10});  // y = 0.5 * (0.5 i)
    RegressionResult r = fit_linear(pts);
    CHECK(r.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.intercept == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.0));
    CHECK(lambda_error_pct(r.slope) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fit: slope and intercept recover 0.05 + 0.64 v under orthogonal noise") {
    // Residuals chosen orthogonal to both regressors, so the coefficients
    // come back exactly.
    std::vector<double> vs{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> noise{0.02, -0.01, -0.02, -0.01, 0.02};
    double sn = 0.0, svn = 0.0;
    for (size_t i = 0; i < vs.size(); ++i) {
        sn += noise[i];
        svn += vs[i] * noise[i];
    }
    REQUIRE(sn == doctest::Approx(0.0));
    REQUIRE(svn == doctest::Approx(0.0));

    std::vector<RegressionPoint> pts;
    for (size_t i = 0; i < vs.size(); ++i)
        pts.push_back({vs[i], 0.05 + 0.64 * vs[i] + noise[i], 1});
    RegressionResult r = fit_linear(pts);
    CHECK(r.slope == doctest::Approx(0.64).epsilon(1e-10));
    CHECK(r.intercept == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(lambda_error_pct(r.slope) == doctest::Approx(28.0).epsilon(1e-9));
    CHECK(r.r_squared > 0.99);
}

TEST_CASE("fit matches closed-form normal equations on random data") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        size_t n = 5 + rng() % 8;
        std::vector<RegressionPoint> pts;
        for (size_t i = 0; i < n; ++i) {
            double v = 0.25 * static_cast<double>(i + 1);
            double y = 0.1 + 0.6 * v + 0.2 * (unif(rng) - 0.5);
            pts.push_back({v, y, 1});
        }
        RegressionResult r = fit_linear(pts);
        long double slope, intercept, r2, tstat;
        normal_equations(pts, slope, intercept, r2, tstat);
        CHECK(r.slope == doctest::Approx(static_cast<double>(slope)).epsilon(1e-10));
        CHECK(r.intercept == doctest::Approx(static_cast<double>(intercept)).epsilon(1e-10));
        CHECK(r.r_squared == doctest::Approx(static_cast<double>(r2)).epsilon(1e-10));
    }
}

TEST_CASE("fit: residual orthogonality and the two R^2 routes agree") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<RegressionPoint> pts;
        for (int i = 1; i <= 10; ++i)
            pts.push_back({0.5 * i, 0.3 * i + unif(rng), 1});
        RegressionResult r = fit_linear(pts);

        double sum_res = 0.0, sum_res_v = 0.0, sse = 0.0, sst = 0.0, ybar = 0.0;
        for (const auto& p : pts) ybar += p.mean_impact;
        ybar /= static_cast<double>(pts.size());
        for (const auto& p : pts) {
            double res = p.mean_impact - (r.intercept + r.slope * p.v);
            sum_res += res;
            sum_res_v += res * p.v;
            sse += res * res;
            sst += (p.mean_impact - ybar) * (p.mean_impact - ybar);
        }
        CHECK(std::abs(sum_res) < 1e-9);
        CHECK(std::abs(sum_res_v) < 1e-9);
        CHECK(r.r_squared == doctest::Approx(1.0 - sse / sst).epsilon(1e-10));
    }
}

TEST_CASE("fit: rescaling v by c scales the slope by 1/c and nothing else") {
    std::vector<RegressionPoint> pts;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(-0.2, 0.2);
    for (int i = 1; i <= 8; ++i) pts.push_back({0.25 * i, 0.5 * 0.25 * i + unif(rng), 1});
    RegressionResult base = fit_linear(pts);

    for (double c : {2.0, 0.5, 10.0}) {
        std::vector<RegressionPoint> scaled = pts;
        for (auto& p : scaled) p.v *= c;
        RegressionResult r = fit_linear(scaled);
        CHECK(r.slope == doctest::Approx(base.slope / c).epsilon(1e-9));
        CHECK(r.intercept == doctest::Approx(base.intercept).epsilon(1e-9));
        CHECK(r.r_squared == doctest::Approx(base.r_squared).epsilon(1e-9));
        CHECK(r.p_value == doctest::Approx(base.p_value).epsilon(1e-9));
    }
}

TEST_CASE("fit: degenerate designs are rejected") {
    std::vector<RegressionPoint> two{{1.0, 0.5, 1}, {2.0, 1.0, 1}};
    CHECK_THROWS_AS((void)fit_linear(two), std::invalid_argument);

    std::vector<RegressionPoint> flat{{1.0, 0.5, 1}, {1.0, 0.6, 1}, {1.0, 0.7, 1}};
    CHECK_THROWS_AS((void)fit_linear(flat), TickError);
}

TEST_CASE("student t p-values: frozen anchors (scipy.stats.t) and the quadrature oracle") {
    struct Anchor {
        double t;
        int64_t dof;
        double p;
    };
    // reference values from scipy.stats: 2 * t.sf(t, df)
    const Anchor anchors[] = {
        {2.5, 8, 3.694203771362407e-02},  {1.0, 3, 3.910022189557705e-01},
        {5.0, 5, 4.104715980053322e-03},  {0.5, 10, 6.278936057429729e-01},
        {12.0, 4, 2.764285485029730e-04}, {3.25, 6, 1.746634237890662e-02},
    };
    for (const Anchor& a : anchors) {
        CHECK(student_t_p_value(a.t, a.dof) == doctest::Approx(a.p).epsilon(1e-12));
        CHECK(reference::t_p_value_quadrature(a.t, a.dof) ==
              doctest::Approx(a.p).epsilon(1e-10));
    }
    CHECK(student_t_p_value(0.0, 5) == doctest::Approx(1.0));
}

TEST_CASE("estimated impact is half a tick per unit volume and exactly linear") {
    CHECK(estimated_impact_ticks(1.0) == doctest::Approx(0.5));
    CHECK(estimated_impact_ticks(0.0) == doctest::Approx(0.0));
    CHECK(estimated_impact_ticks(2.0) == doctest::Approx(1.0));
    CHECK(estimated_impact_currency(1.0, 0.01) == doctest::Approx(0.005));
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> unif(0.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        double a = unif(rng), b = unif(rng);
        CHECK(estimated_impact_ticks(a + b) ==
              doctest::Approx(estimated_impact_ticks(a) + estimated_impact_ticks(b))
                  .epsilon(1e-12));
    }
}

TEST_CASE("lambda error against the delta/2 estimate") {
    CHECK(lambda_error_pct(0.64) == doctest::Approx(28.0).epsilon(1e-9));
    CHECK(lambda_error_pct(1.10) == doctest::Approx(120.0).epsilon(1e-9));
    CHECK(lambda_error_pct(0.5) == doctest::Approx(0.0));
}

TEST_CASE("participation curve: all-aggressive bins give a flat 1.0 curve") {
    std::vector<VolumeBinStats> bins;
    for (double v : {0.5, 1.0, 2.0}) {
        BinSamples samples;
        for (int i = 0; i < 5; ++i) {
            samples.impacts.push_back(0.5);
            samples.durations_ns.push_back(0);
            samples.participations.push_back(1.0);
        }
        bins.push_back(make_bin_stats(v, samples));
    }
    ParticipationCurve curve = participation_curve(bins);
    REQUIRE(curve.points.size() == 3);
    for (const auto& [v, p] : curve.points) CHECK(p == doctest::Approx(1.0));
    CHECK(curve.asymptote == doctest::Approx(1.0));
}

TEST_CASE("participation curve: asymptote is the median at the largest populated v") {
    std::vector<VolumeBinStats> bins;
    double medians[] = {0.9, 0.5, 0.22};
    double vs[] = {1.0, 3.0, 5.0};
    for (int i = 0; i < 3; ++i) {
        BinSamples samples;
        for (int j = 0; j < 7; ++j) {
            samples.impacts.push_back(0.5);
            samples.durations_ns.push_back(0);
            samples.participations.push_back(medians[i]);
        }
        bins.push_back(make_bin_stats(vs[i], samples));
    }
    BinSamples none;
    bins.push_back(make_bin_stats(6.0, none));  // empty bin is skipped
    ParticipationCurve curve = participation_curve(bins);
    CHECK(curve.asymptote == doctest::Approx(0.22));
}

TEST_CASE("bins csv round-trips through the toolkit reader") {
    std::mt19937_64 rng(41);
    std::vector<VolumeBinStats> bins;
    for (double v : {0.5, 1.0, 1.5}) {
        BinSamples samples;
        size_t n = 5 + rng() % 50;
        for (size_t i = 0; i < n; ++i) {
            samples.impacts.push_back(0.5 * static_cast<double>(static_cast<int>(rng() % 7) - 2));
            samples.durations_ns.push_back(static_cast<int64_t>(rng() % 3'000'000'000));
            samples.participations.push_back(0.2 + 0.8 * static_cast<double>(rng() % 50) / 50.0);
        }
        bins.push_back(make_bin_stats(v, samples));
    }
    BinSamples none;
    bins.push_back(make_bin_stats(2.0, none));

    std::string path = temp_path("tickimpact_bins_test.csv");
    write_bins_csv(path, bins);
    auto back = read_bins_csv(path);
    REQUIRE(back.size() == bins.size());
    for (size_t i = 0; i < bins.size(); ++i) {
        CHECK(back[i].v == bins[i].v);
        CHECK(back[i].n == bins[i].n);
        CHECK(back[i].mean_impact == bins[i].mean_impact);
        CHECK(back[i].sd_impact == bins[i].sd_impact);
        CHECK(back[i].q1_impact == bins[i].q1_impact);
        CHECK(back[i].median_impact == bins[i].median_impact);
        CHECK(back[i].q3_impact == bins[i].q3_impact);
        CHECK(back[i].outliers == bins[i].outliers);
        CHECK(back[i].histogram == bins[i].histogram);
        CHECK(back[i].median_participation == bins[i].median_participation);
        CHECK(back[i].zero_time_fraction == bins[i].zero_time_fraction);
        CHECK(back[i].low_count == bins[i].low_count);
    }
    std::filesystem::remove(path);
}

TEST_CASE("summary file round-trips") {
    AnalysisSummary s;
    s.instrument = "SYN1";
    s.tick_size = 0.01;
    s.touch_volume = 14.25;
    s.n_events = 1000;
    s.n_trades = 42;
    s.n_episodes_accepted = 17;
    s.n_episodes_rejected = 3;
    s.n_episodes_dropped = 1;
    RegressionResult fit;
    fit.intercept = 0.05;
    fit.slope = 0.64;
    fit.r_squared = 0.997;
    fit.p_value = 1.2e-40;
    fit.n_points = 20;
    s.fit = fit;
    s.part_rate_asymptote = 0.21;

    std::string path = temp_path("tickimpact_summary_test.txt");
    write_summary(path, s);
    AnalysisSummary back = read_summary(path);
    CHECK(back.instrument == s.instrument);
    CHECK(back.tick_size == s.tick_size);
    CHECK(back.touch_volume == s.touch_volume);
    CHECK(back.n_events == s.n_events);
    CHECK(back.n_episodes_dropped == 1);
    REQUIRE(back.fit.has_value());
    CHECK(back.fit->slope == fit.slope);
    CHECK(back.fit->p_value == fit.p_value);
    CHECK(back.part_rate_asymptote == s.part_rate_asymptote);
    std::filesystem::remove(path);
}
