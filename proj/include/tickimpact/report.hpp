#pragma once

#include <string>
#include <vector>

#include "tickimpact/stats.hpp"

namespace tickimpact {

// Instruments whose fitted intercept exceeds this look concave at small
// volumes (the impact jumps to a sizeable fraction of a tick immediately).
constexpr double kConcaveInterceptTicks = 0.25;

struct ReportRow {
    std::string ric;
    double touch = 0.0;
    double tick_size = 0.0;
    double mu = 0.0;
    double lambda = 0.0;
    double lambda_err_pct = 0.0;
    double r2 = 0.0;
    double p_value = 0.0;
    double part_rate = 0.0;  // fraction
    bool concave = false;    // reporting heuristic, not part of the CSV
};

ReportRow report_row(const AnalysisSummary& summary);

// One row per analysis directory (reads <dir>/summary.txt).
std::vector<ReportRow> build_report(const std::vector<std::string>& analysis_dirs);

// Header: RIC,touch,delta,mu,lambda,lambda_err_pct,r2,p_value,part_rate
void write_table_csv(const std::string& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_table_csv(const std::string& path);

}  // namespace tickimpact
