#include "tickimpact/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tickimpact/tick_file.hpp"

namespace tickimpact {

ReportRow report_row(const AnalysisSummary& summary) {
    ReportRow row;
    row.ric = summary.instrument;
    row.touch = summary.touch_volume;
    row.tick_size = summary.tick_size;
    if (summary.fit) {
        row.mu = summary.fit->intercept;
        row.lambda = summary.fit->slope;
        row.lambda_err_pct = lambda_error_pct(summary.fit->slope);
        row.r2 = summary.fit->r_squared;
        row.p_value = summary.fit->p_value;
    } else {
        row.mu = row.lambda = row.lambda_err_pct = row.r2 = row.p_value =
            std::numeric_limits<double>::quiet_NaN();
    }
    row.part_rate = summary.part_rate_asymptote;
    row.concave = summary.fit && summary.fit->intercept > kConcaveInterceptTicks;
    return row;
}

std::vector<ReportRow> build_report(const std::vector<std::string>& analysis_dirs) {
    if (analysis_dirs.empty())
        throw TickError(ErrorCode::ConfigInvalid, "report needs at least one analysis directory");
    std::vector<ReportRow> rows;
    rows.reserve(analysis_dirs.size());
    for (const std::string& dir : analysis_dirs)
        rows.push_back(report_row(read_summary(dir + "/summary.txt")));
    return rows;
}

void write_table_csv(const std::string& path, const std::vector<ReportRow>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write table csv: " + path);
    std::string out = "RIC,touch,delta,mu,lambda,lambda_err_pct,r2,p_value,part_rate\n";
    for (const ReportRow& r : rows) {
        out += r.ric;
        out += ',' + format_double(r.touch);
        out += ',' + format_double(r.tick_size);
        out += ',' + format_double(r.mu);
        out += ',' + format_double(r.lambda);
        out += ',' + format_double(r.lambda_err_pct);
        out += ',' + format_double(r.r2);
        out += ',' + format_double(r.p_value);
        out += ',' + format_double(r.part_rate);
        out += '\n';
    }
    std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
}

std::vector<ReportRow> read_table_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot open table csv: " + path);
    std::string text;
    char buf[1 << 16];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
    std::fclose(f);

    std::vector<ReportRow> rows;
    size_t start = 0;
    int64_t line_no = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line(text.data() + start,
                              (nl == std::string::npos ? text.size() : nl) - start);
        start = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (line_no == 1 || line.empty()) continue;

        std::string_view fields[9];
        size_t fstart = 0;
        for (int i = 0; i < 9; ++i) {
            size_t comma = line.find(',', fstart);
            bool last = i == 8;
            if (!last && comma == std::string_view::npos)
                throw TickError(ErrorCode::MalformedLine, "bad table row", line_no);
            fields[i] = line.substr(fstart, (last ? line.size() : comma) - fstart);
            fstart = comma + 1;
        }
        auto f64 = [&](std::string_view s) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
                throw TickError(ErrorCode::MalformedLine, "bad number in table row", line_no);
            return v;
        };
        ReportRow r;
        r.ric = std::string(fields[0]);
        r.touch = f64(fields[1]);
        r.tick_size = f64(fields[2]);
        r.mu = f64(fields[3]);
        r.lambda = f64(fields[4]);
        r.lambda_err_pct = f64(fields[5]);
        r.r2 = f64(fields[6]);
        r.p_value = f64(fields[7]);
        r.part_rate = f64(fields[8]);
        r.concave = !std::isnan(r.mu) && r.mu > kConcaveInterceptTicks;
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace tickimpact
