#include "tickimpact/stats.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "tickimpact/tick_file.hpp"

namespace tickimpact {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw TickError(ErrorCode::EmptySession, "quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    size_t lo = static_cast<size_t>(h);
    if (lo >= sorted.size() - 1) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double sample_mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = sample_mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

VolumeBinStats make_bin_stats(double v, const BinSamples& samples, int64_t min_count) {
    VolumeBinStats bin;
    bin.v = v;
    bin.n = static_cast<int64_t>(samples.impacts.size());
    bin.low_count = bin.n < min_count;
    if (bin.n == 0) return bin;

    bin.mean_impact = sample_mean(samples.impacts);
    bin.sd_impact = sample_sd(samples.impacts);

    std::vector<double> sorted = samples.impacts;
    std::sort(sorted.begin(), sorted.end());
    bin.q1_impact = quantile_sorted(sorted, 0.25);
    bin.median_impact = quantile_sorted(sorted, 0.5);
    bin.q3_impact = quantile_sorted(sorted, 0.75);
    double iqr = bin.q3_impact - bin.q1_impact;
    double lo_fence = bin.q1_impact - 1.5 * iqr;
    double hi_fence = bin.q3_impact + 1.5 * iqr;
    for (double x : sorted)
        if (x < lo_fence || x > hi_fence) bin.outliers.push_back(x);

    for (double x : samples.impacts) bin.histogram[llround(x * 2.0)] += 1;

    std::vector<double> parts = samples.participations;
    std::sort(parts.begin(), parts.end());
    bin.median_participation = quantile_sorted(parts, 0.5);

    std::vector<double> dur_s;
    dur_s.reserve(samples.durations_ns.size());
    int64_t zero = 0;
    for (int64_t d : samples.durations_ns) {
        dur_s.push_back(static_cast<double>(d) * 1e-9);
        if (d == 0) ++zero;
    }
    bin.zero_time_fraction = static_cast<double>(zero) / static_cast<double>(bin.n);
    bin.mean_duration_s = sample_mean(dur_s);

    std::sort(dur_s.begin(), dur_s.end());
    bin.median_duration_s = quantile_sorted(dur_s, 0.5);

    // Mean execution time with upper outliers removed; medians stay raw.
    double dq1 = quantile_sorted(dur_s, 0.25);
    double dq3 = quantile_sorted(dur_s, 0.75);
    double dur_fence = dq3 + 1.5 * (dq3 - dq1);
    double trimmed_sum = 0.0;
    int64_t trimmed_n = 0;
    for (double d : dur_s) {
        if (d > dur_fence) break;
        trimmed_sum += d;
        ++trimmed_n;
    }
    bin.mean_duration_trimmed_s = trimmed_n > 0 ? trimmed_sum / static_cast<double>(trimmed_n)
                                                : bin.mean_duration_s;
    return bin;
}

std::vector<VolumeBinStats> aggregate_bins(const MultiScanResult& scan, int64_t min_count) {
    std::vector<VolumeBinStats> bins;
    bins.reserve(scan.v_grid.size());
    for (size_t i = 0; i < scan.v_grid.size(); ++i) {
        BinSamples samples;
        for (const ImbalanceEpisode& e : scan.episodes[i])
            if (e.accepted) samples.add(e);
        bins.push_back(make_bin_stats(scan.v_grid[i], samples, min_count));
    }
    return bins;
}

namespace {

// Continued fraction for the regularized incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double ibeta_regularized(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_p_value(double t, int64_t dof) {
    if (dof < 1) throw TickError(ErrorCode::ConfigInvalid, "t test needs dof >= 1");
    if (!std::isfinite(t)) return 0.0;
    double nu = static_cast<double>(dof);
    // P(|T| > t) = I_x(nu/2, 1/2) with x = nu / (nu + t^2).
    double x = nu / (nu + t * t);
    return ibeta_regularized(nu / 2.0, 0.5, x);
}

RegressionResult fit_linear(const std::vector<RegressionPoint>& points, bool weighted) {
    if (points.size() < 3)
        throw std::invalid_argument("fit_linear needs at least 3 points");

    double sw = 0.0, swx = 0.0, swy = 0.0;
    for (const RegressionPoint& p : points) {
        double w = weighted ? static_cast<double>(p.n) : 1.0;
        sw += w;
        swx += w * p.v;
        swy += w * p.mean_impact;
    }
    if (sw <= 0.0) throw std::invalid_argument("fit_linear: nonpositive total weight");
    double xbar = swx / sw;
    double ybar = swy / sw;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const RegressionPoint& p : points) {
        double w = weighted ? static_cast<double>(p.n) : 1.0;
        double dx = p.v - xbar;
        double dy = p.mean_impact - ybar;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if (sxx <= 0.0)
        throw TickError(ErrorCode::DegenerateDesign, "all v values identical in regression");

    RegressionResult r;
    r.n_points = static_cast<int64_t>(points.size());
    r.slope = sxy / sxx;
    r.intercept = ybar - r.slope * xbar;

    double sse = syy - r.slope * sxy;  // = syy - sxy^2/sxx
    if (sse < 0.0) sse = 0.0;
    if (syy > 0.0) {
        r.r_squared = 1.0 - sse / syy;
    } else {
        r.r_squared = sse <= 0.0 ? 1.0 : 0.0;
    }

    int64_t dof = r.n_points - 2;
    double s2 = sse / static_cast<double>(dof);
    if (s2 <= 0.0) {
        r.p_value = r.slope == 0.0 ? 1.0 : 0.0;  // exact fit
    } else {
        double t = r.slope / std::sqrt(s2 / sxx);
        r.p_value = student_t_p_value(t, dof);
    }
    return r;
}

ParticipationCurve participation_curve(const std::vector<VolumeBinStats>& bins) {
    if (bins.empty())
        throw std::invalid_argument("participation_curve needs at least one bin");
    ParticipationCurve curve;
    for (const VolumeBinStats& b : bins) {
        if (b.n == 0) continue;
        curve.points.emplace_back(b.v, b.median_participation);
    }
    if (!curve.points.empty()) curve.asymptote = curve.points.back().second;
    return curve;
}

// ----- artifact io -----

namespace {

std::string join_doubles(const std::vector<double>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ';';
        out += format_double(xs[i]);
    }
    return out;
}

std::vector<double> split_doubles(std::string_view s) {
    std::vector<double> out;
    size_t start = 0;
    while (start < s.size()) {
        size_t semi = s.find(';', start);
        std::string_view tok = s.substr(start, (semi == std::string_view::npos ? s.size() : semi) - start);
        start = semi == std::string_view::npos ? s.size() : semi + 1;
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw TickError(ErrorCode::MalformedLine, "bad list value in bins csv");
        out.push_back(v);
    }
    return out;
}

}  // namespace

void write_bins_csv(const std::string& path, const std::vector<VolumeBinStats>& bins) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write bins csv: " + path);
    std::string out =
        "v,n,mean_impact,sd_impact,q1_impact,median_impact,q3_impact,outliers,histogram,"
        "median_participation,mean_duration_s,mean_duration_trimmed_s,median_duration_s,"
        "zero_time_fraction,low_count\n";
    for (const VolumeBinStats& b : bins) {
        out += format_double(b.v);
        out += ',' + std::to_string(b.n);
        if (b.n == 0) {
            out += ",,,,,,,,,,,,,";
            out += b.low_count ? "1\n" : "0\n";
            continue;
        }
        out += ',' + format_double(b.mean_impact);
        out += ',' + format_double(b.sd_impact);
        out += ',' + format_double(b.q1_impact);
        out += ',' + format_double(b.median_impact);
        out += ',' + format_double(b.q3_impact);
        out += ',' + join_doubles(b.outliers);
        out += ',';
        bool first = true;
        for (const auto& [half_ticks, count] : b.histogram) {
            if (!first) out += ';';
            first = false;
            out += std::to_string(half_ticks) + ':' + std::to_string(count);
        }
        out += ',' + format_double(b.median_participation);
        out += ',' + format_double(b.mean_duration_s);
        out += ',' + format_double(b.mean_duration_trimmed_s);
        out += ',' + format_double(b.median_duration_s);
        out += ',' + format_double(b.zero_time_fraction);
        out += b.low_count ? ",1\n" : ",0\n";
    }
    std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
}

std::vector<VolumeBinStats> read_bins_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot open bins csv: " + path);
    std::string text;
    char buf[1 << 16];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
    std::fclose(f);

    std::vector<VolumeBinStats> bins;
    size_t start = 0;
    int64_t line_no = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line(text.data() + start,
                              (nl == std::string::npos ? text.size() : nl) - start);
        start = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (line_no == 1 || line.empty()) continue;

        std::array<std::string_view, 15> fields{};
        size_t fstart = 0;
        for (int i = 0; i < 15; ++i) {
            size_t comma = line.find(',', fstart);
            bool last = i == 14;
            if (!last && comma == std::string_view::npos)
                throw TickError(ErrorCode::MalformedLine, "bad bins row", line_no);
            fields[static_cast<size_t>(i)] =
                line.substr(fstart, (last ? line.size() : comma) - fstart);
            fstart = comma + 1;
        }
        auto f64 = [&](std::string_view s) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
                throw TickError(ErrorCode::MalformedLine, "bad number in bins row", line_no);
            return v;
        };
        VolumeBinStats b;
        b.v = f64(fields[0]);
        b.n = static_cast<int64_t>(f64(fields[1]));
        b.low_count = fields[14] == "1";
        if (b.n > 0) {
            b.mean_impact = f64(fields[2]);
            b.sd_impact = f64(fields[3]);
            b.q1_impact = f64(fields[4]);
            b.median_impact = f64(fields[5]);
            b.q3_impact = f64(fields[6]);
            b.outliers = split_doubles(fields[7]);
            std::string_view hist = fields[8];
            size_t hstart = 0;
            while (hstart < hist.size()) {
                size_t semi = hist.find(';', hstart);
                std::string_view tok =
                    hist.substr(hstart, (semi == std::string_view::npos ? hist.size() : semi) - hstart);
                hstart = semi == std::string_view::npos ? hist.size() : semi + 1;
                size_t colon = tok.find(':');
                if (colon == std::string_view::npos)
                    throw TickError(ErrorCode::MalformedLine, "bad histogram in bins row", line_no);
                b.histogram[static_cast<int64_t>(f64(tok.substr(0, colon)))] =
                    static_cast<int64_t>(f64(tok.substr(colon + 1)));
            }
            b.median_participation = f64(fields[9]);
            b.mean_duration_s = f64(fields[10]);
            b.mean_duration_trimmed_s = f64(fields[11]);
            b.median_duration_s = f64(fields[12]);
            b.zero_time_fraction = f64(fields[13]);
        }
        bins.push_back(std::move(b));
    }
    return bins;
}

void write_summary(const std::string& path, const AnalysisSummary& summary) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write summary: " + path);
    std::string out;
    out += "instrument = " + summary.instrument + "\n";
    out += "tick_size = " + format_double(summary.tick_size) + "\n";
    out += "touch_volume = " + format_double(summary.touch_volume) + "\n";
    out += "n_events = " + std::to_string(summary.n_events) + "\n";
    out += "n_trades = " + std::to_string(summary.n_trades) + "\n";
    out += "n_episodes_accepted = " + std::to_string(summary.n_episodes_accepted) + "\n";
    out += "n_episodes_rejected = " + std::to_string(summary.n_episodes_rejected) + "\n";
    out += "n_episodes_dropped = " + std::to_string(summary.n_episodes_dropped) + "\n";
    if (summary.fit) {
        out += "mu_ticks = " + format_double(summary.fit->intercept) + "\n";
        out += "lambda_ticks = " + format_double(summary.fit->slope) + "\n";
        out += "lambda_err_pct = " + format_double(lambda_error_pct(summary.fit->slope)) + "\n";
        out += "r_squared = " + format_double(summary.fit->r_squared) + "\n";
        out += "p_value = " + format_double(summary.fit->p_value) + "\n";
        out += "n_fit_points = " + std::to_string(summary.fit->n_points) + "\n";
    }
    out += "part_rate_asymptote = " + format_double(summary.part_rate_asymptote) + "\n";
    std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
}

AnalysisSummary read_summary(const std::string& path) {
    AnalysisSummary s;
    RegressionResult fit;
    bool has_fit = false;
    auto to_f = [&](const std::string& v) {
        double d = 0.0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
        if (ec != std::errc() || p != v.data() + v.size())
            throw TickError(ErrorCode::MalformedLine, "bad number in summary: " + v);
        return d;
    };
    for (const auto& [key, value] : read_key_value_file(path)) {
        if (key == "instrument") s.instrument = value;
        else if (key == "tick_size") s.tick_size = to_f(value);
        else if (key == "touch_volume") s.touch_volume = to_f(value);
        else if (key == "n_events") s.n_events = static_cast<int64_t>(to_f(value));
        else if (key == "n_trades") s.n_trades = static_cast<int64_t>(to_f(value));
        else if (key == "n_episodes_accepted")
            s.n_episodes_accepted = static_cast<int64_t>(to_f(value));
        else if (key == "n_episodes_rejected")
            s.n_episodes_rejected = static_cast<int64_t>(to_f(value));
        else if (key == "n_episodes_dropped")
            s.n_episodes_dropped = static_cast<int64_t>(to_f(value));
        else if (key == "mu_ticks") { fit.intercept = to_f(value); has_fit = true; }
        else if (key == "lambda_ticks") { fit.slope = to_f(value); has_fit = true; }
        else if (key == "r_squared") { fit.r_squared = to_f(value); has_fit = true; }
        else if (key == "p_value") { fit.p_value = to_f(value); has_fit = true; }
        else if (key == "n_fit_points") { fit.n_points = static_cast<int64_t>(to_f(value)); }
        else if (key == "part_rate_asymptote") s.part_rate_asymptote = to_f(value);
    }
    if (has_fit) s.fit = fit;
    return s;
}

}  // namespace tickimpact
