#include "tickimpact/imbalance.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "tickimpact/tick_file.hpp"

namespace tickimpact {

std::vector<double> default_v_grid(double v_max, double v_step) {
    std::vector<double> grid;
    int n = static_cast<int>(v_max / v_step + 1e-9);
    grid.reserve(static_cast<size_t>(n));
    for (int i = 1; i <= n; ++i) grid.push_back(static_cast<double>(i) * v_step);
    return grid;
}

std::vector<ImbalanceEpisode> extract_episodes(const std::vector<Level1Event>& events,
                                               const SessionDescriptor& descriptor,
                                               int64_t target_vt, const ExtractionConfig& cfg) {
    if (target_vt < 1)
        throw TickError(ErrorCode::ConfigInvalid, "target V_T must be >= 1 contract");
    SpanSource source(events);
    ReducedSession reduced = reduce_session(source, descriptor);

    std::vector<ImbalanceEpisode> episodes;
    EpisodeMachine machine(target_vt, descriptor.tick_size, cfg.overshoot_tol,
                           cfg.require_post_quote);
    for (const TradeRecord& rec : reduced.trades) {
        if (auto episode = machine.on_trade(rec)) episodes.push_back(*episode);
    }
    return episodes;
}

MultiScanResult fused_multi_target_scan(const std::vector<Level1Event>& events,
                                        const SessionDescriptor& descriptor,
                                        const ExtractionConfig& cfg) {
    MultiScanResult result;
    result.v_grid = cfg.v_grid.empty() ? default_v_grid() : cfg.v_grid;
    for (size_t i = 1; i < result.v_grid.size(); ++i) {
        if (result.v_grid[i] <= result.v_grid[i - 1])
            throw TickError(ErrorCode::ConfigInvalid, "v_grid must be strictly increasing");
    }
    if (!result.v_grid.empty() && result.v_grid.front() <= 0.0)
        throw TickError(ErrorCode::ConfigInvalid, "v_grid values must be positive");
    if (cfg.touch_volume <= 0.0)
        throw TickError(ErrorCode::ConfigInvalid, "touch_volume must be set for the scan");

    SpanSource source(events);
    ReducedSession reduced = reduce_session(source, descriptor);
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

namespace {

void append_episode_row(std::string& out, double v, const ImbalanceEpisode& e) {
    char buf[32];
    auto put_f = [&](double value) {
        auto res = std::to_chars(buf, buf + sizeof(buf), value);
        out.append(buf, res.ptr);
        out += ',';
    };
    auto put_i = [&](int64_t value) {
        auto res = std::to_chars(buf, buf + sizeof(buf), value);
        out.append(buf, res.ptr);
        out += ',';
    };
    put_f(v);
    put_i(e.target_vt);
    out += e.direction > 0 ? "buy," : "sell,";
    put_i(e.v_i_final);
    put_f(e.impact_ticks);
    put_i(e.duration_ns());
    put_i(e.total_traded);
    put_f(episode_participation(e));
    out += e.accepted ? "1\n" : "0\n";
}

}  // namespace

void write_episodes_csv(const std::string& path, const MultiScanResult& result) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write episodes csv: " + path);
    std::string out =
        "v,V_T,direction,V_I,impact_ticks,duration_ns,total_traded,participation,accepted\n";
    for (size_t i = 0; i < result.v_grid.size(); ++i) {
        for (const ImbalanceEpisode& e : result.episodes[i]) {
            append_episode_row(out, result.v_grid[i], e);
            if (out.size() > (1 << 20)) {
                std::fwrite(out.data(), 1, out.size(), f);
                out.clear();
            }
        }
    }
    if (!out.empty()) std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
}

std::vector<EpisodeRow> read_episodes_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot open episodes csv: " + path);
    std::string text;
    char buf[1 << 16];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
    std::fclose(f);

    std::vector<EpisodeRow> rows;
    size_t start = 0;
    int64_t line_no = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line(text.data() + start,
                              (nl == std::string::npos ? text.size() : nl) - start);
        start = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (line_no == 1 || line.empty()) continue;  // header

        EpisodeRow row;
        std::array<std::string_view, 9> fields{};
        size_t fstart = 0;
        for (int i = 0; i < 9; ++i) {
            size_t comma = line.find(',', fstart);
            bool last = i == 8;
            if (!last && comma == std::string_view::npos)
                throw TickError(ErrorCode::MalformedLine, "bad episode row", line_no);
            fields[static_cast<size_t>(i)] =
                line.substr(fstart, (last ? line.size() : comma) - fstart);
            fstart = comma + 1;
        }
        auto f64 = [&](std::string_view s) {
            double v;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
                throw TickError(ErrorCode::MalformedLine, "bad number in episode row", line_no);
            return v;
        };
        auto i64 = [&](std::string_view s) {
            int64_t v;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
                throw TickError(ErrorCode::MalformedLine, "bad integer in episode row", line_no);
            return v;
        };
        row.v = f64(fields[0]);
        row.episode.target_vt = i64(fields[1]);
        row.episode.direction = fields[2] == "buy" ? +1 : -1;
        row.episode.v_i_final = i64(fields[3]);
        row.episode.impact_ticks = f64(fields[4]);
        row.episode.t_first_trade = 0;
        row.episode.t_last_trade = i64(fields[5]);
        row.episode.total_traded = i64(fields[6]);
        row.participation = f64(fields[7]);
        row.episode.accepted = fields[8] == "1";
        rows.push_back(row);
    }
    return rows;
}

}  // namespace tickimpact
