#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tickimpact/book.hpp"
#include "tickimpact/events.hpp"
#include "tickimpact/touch.hpp"

namespace tickimpact {

// Three-way aggressor side of a trade against the prevailing quote:
// +1 at or above the ask, -1 at or below the bid, 0 inside the spread.
enum class TradeSign : int { Sell = -1, None = 0, Buy = +1 };

inline TradeSign classify_trade(double price, const BookState& book) {
    if (!book.valid())
        throw TickError(ErrorCode::NoQuoteYet, "trade before a two-sided quote");
    if (price >= book.ask_price) return TradeSign::Buy;
    if (price <= book.bid_price) return TradeSign::Sell;
    return TradeSign::None;
}

// One completed run of the imbalance state machine.
struct ImbalanceEpisode {
    int64_t target_vt = 0;
    int direction = 0;  // +1 buy, -1 sell
    int64_t v_i_final = 0;
    double p0 = 0.0;
    double p_post = 0.0;
    double impact_ticks = 0.0;  // direction * (p_post - p0) / tick
    int64_t t_first_trade = 0;
    int64_t t_last_trade = 0;
    int64_t total_traded = 0;  // every trade in the window, zero-signed included
    bool accepted = false;

    int64_t duration_ns() const { return t_last_trade - t_first_trade; }
};

inline double episode_participation(const ImbalanceEpisode& e) {
    if (e.total_traded <= 0)
        throw TickError(ErrorCode::ZeroVolumeWindow, "episode has no traded volume");
    double p = static_cast<double>(std::llabs(e.v_i_final)) /
               static_cast<double>(e.total_traded);
    return p > 1.0 ? 1.0 : p;
}

struct ExtractionConfig {
    double overshoot_tol = 0.1;
    std::vector<double> v_grid;  // empty -> default_v_grid()
    double touch_volume = 0.0;
    bool require_post_quote = true;
};

std::vector<double> default_v_grid(double v_max = 5.0, double v_step = 0.25);

// V_T for a normalized volume v: nearest contract count, at least one.
inline int64_t target_from_v(double v, double touch_volume) {
    int64_t vt = std::llround(v * touch_volume);
    return vt < 1 ? 1 : vt;
}

// A trade after stream reduction: side classification against the book in
// force just before it, the mid at that moment, and the mid of the first
// two-sided quote that follows it (absent for end-of-session trades).
struct TradeRecord {
    int64_t timestamp_ns = 0;
    int64_t size = 0;
    int sign = 0;
    double pre_mid = 0.0;
    double post_mid = 0.0;
    bool has_post = false;
};

struct StreamCounters {
    int64_t events = 0;
    int64_t trades = 0;
    int64_t quotes = 0;
    int64_t pre_session_events = 0;   // before the first two-sided quote
    int64_t skipped_book_trades = 0;  // trades with no valid book to classify against
    int64_t invalid_intervals = 0;    // one-sided or crossed quote intervals
};

// Single pass over a session: folds the book, accumulates the touch volume,
// and emits one TradeRecord per classifiable trade with its post-mid
// backfilled from the next two-sided quote.
struct ReducedSession {
    std::vector<TradeRecord> trades;
    StreamCounters counters;
    TouchAccumulator touch;
};

template <class Source>
ReducedSession reduce_session(Source&& source, const SessionDescriptor& descriptor) {
    ReducedSession out;
    BookState book;
    book.tick_size = descriptor.tick_size;
    std::vector<uint32_t> pending;
    bool session_open = false;

    Level1Event event;
    while (source.next(event)) {
        ++out.counters.events;
        if (event.is_quote()) {
            ++out.counters.quotes;
            book = apply_event(book, event);
            out.touch.on_quote(book, event.timestamp_ns);
            if (book.valid()) {
                session_open = true;
                if (!pending.empty()) {
                    double mid = book.mid();
                    for (uint32_t idx : pending) {
                        out.trades[idx].post_mid = mid;
                        out.trades[idx].has_post = true;
                    }
                    pending.clear();
                }
            }
        } else {
            ++out.counters.trades;
            if (!session_open) {
                ++out.counters.pre_session_events;
                continue;
            }
            if (!book.valid()) {
                ++out.counters.skipped_book_trades;
                continue;
            }
            TradeRecord rec;
            rec.timestamp_ns = event.timestamp_ns;
            rec.size = event.trade_size;
            rec.sign = static_cast<int>(classify_trade(event.trade_price, book));
            rec.pre_mid = book.mid();
            pending.push_back(static_cast<uint32_t>(out.trades.size()));
            out.trades.push_back(rec);
            continue;
        }
        if (!session_open) ++out.counters.pre_session_events;
    }
    out.touch.finish(descriptor.session_end_ns);
    out.counters.invalid_intervals = out.touch.invalid_intervals();
    return out;
}

// Adapter so in-memory event vectors can feed the streaming reducer.
class SpanSource {
public:
    explicit SpanSource(const std::vector<Level1Event>& events) : events_(&events) {}
    bool next(Level1Event& event) {
        if (pos_ >= events_->size()) return false;
        event = (*events_)[pos_++];
        return true;
    }

private:
    const std::vector<Level1Event>* events_;
    size_t pos_ = 0;
};

struct TargetCounters {
    int64_t accepted = 0;
    int64_t rejected_overshoot = 0;
    int64_t dropped_no_post_quote = 0;
};

// The per-target state machine. Signed volumes accumulate from the first
// nonzero-signed trade after an idle point; any zero landing or sign flip of
// the running sum resets to idle (the crossing trade is consumed); the run
// stops once |V_I| >= V_T. P_0 is the mid just before the anchoring trade.
class EpisodeMachine {
public:
    EpisodeMachine(int64_t target_vt, double tick_size, double overshoot_tol,
                   bool require_post_quote)
        : target_vt_(target_vt),
          tick_size_(tick_size),
          overshoot_tol_(overshoot_tol),
          require_post_quote_(require_post_quote) {}

    std::optional<ImbalanceEpisode> on_trade(const TradeRecord& rec) {
        if (!active_) {
            if (rec.sign == 0) return std::nullopt;
            active_ = true;
            v_i_ = rec.sign * rec.size;
            p0_ = rec.pre_mid;
            t_first_ = rec.timestamp_ns;
            total_ = rec.size;
            if (std::llabs(v_i_) >= target_vt_) return terminate(rec);
            return std::nullopt;
        }

        total_ += rec.size;
        if (rec.sign == 0) return std::nullopt;

        int64_t next = v_i_ + rec.sign * rec.size;
        if (next == 0 || (next > 0) != (v_i_ > 0)) {
            // Crossed or landed on zero before reaching the target: back to
            // equilibrium. The residue of the crossing trade is discarded.
            active_ = false;
            return std::nullopt;
        }
        v_i_ = next;
        if (std::llabs(v_i_) >= target_vt_) return terminate(rec);
        return std::nullopt;
    }

    const TargetCounters& counters() const { return counters_; }
    int64_t target() const { return target_vt_; }

private:
    std::optional<ImbalanceEpisode> terminate(const TradeRecord& rec) {
        active_ = false;
        double p_post;
        if (rec.has_post) {
            p_post = rec.post_mid;
        } else if (require_post_quote_) {
            ++counters_.dropped_no_post_quote;
            return std::nullopt;
        } else {
            p_post = rec.pre_mid;  // last known mid
        }

        ImbalanceEpisode e;
        e.target_vt = target_vt_;
        e.direction = v_i_ > 0 ? +1 : -1;
        e.v_i_final = v_i_;
        e.p0 = p0_;
        e.p_post = p_post;
        e.impact_ticks = e.direction * (p_post - p0_) / tick_size_;
        e.t_first_trade = t_first_;
        e.t_last_trade = rec.timestamp_ns;
        e.total_traded = total_;
        double overshoot =
            static_cast<double>(std::llabs(v_i_) - target_vt_) / static_cast<double>(target_vt_);
        e.accepted = overshoot <= overshoot_tol_;
        if (e.accepted)
            ++counters_.accepted;
        else
            ++counters_.rejected_overshoot;
        return e;
    }

    int64_t target_vt_;
    double tick_size_;
    double overshoot_tol_;
    bool require_post_quote_;

    bool active_ = false;
    int64_t v_i_ = 0;
    double p0_ = 0.0;
    int64_t t_first_ = 0;
    int64_t total_ = 0;
    TargetCounters counters_;
};

// Runs one machine per target over an already-reduced trade list, fused into
// a single pass. sink(target_index, episode) receives completed episodes.
template <class EpisodeSink>
std::vector<TargetCounters> scan_trades(const std::vector<TradeRecord>& trades,
                                        const std::vector<int64_t>& targets, double tick_size,
                                        const ExtractionConfig& cfg, EpisodeSink&& sink) {
    std::vector<EpisodeMachine> machines;
    machines.reserve(targets.size());
    for (int64_t vt : targets)
        machines.emplace_back(vt, tick_size, cfg.overshoot_tol, cfg.require_post_quote);

    for (const TradeRecord& rec : trades) {
        for (size_t i = 0; i < machines.size(); ++i) {
            if (auto episode = machines[i].on_trade(rec)) sink(i, *episode);
        }
    }

    std::vector<TargetCounters> counters;
    counters.reserve(machines.size());
    for (const EpisodeMachine& m : machines) counters.push_back(m.counters());
    return counters;
}

std::vector<ImbalanceEpisode> extract_episodes(const std::vector<Level1Event>& events,
                                               const SessionDescriptor& descriptor,
                                               int64_t target_vt, const ExtractionConfig& cfg);

struct MultiScanResult {
    std::vector<double> v_grid;
    std::vector<int64_t> targets;
    std::vector<std::vector<ImbalanceEpisode>> episodes;  // parallel to v_grid
    std::vector<TargetCounters> target_counters;
    StreamCounters counters;
    double touch_volume = 0.0;
};

// One pass over the event stream, one independent state machine per grid
// point. Equivalent to running extract_episodes per target.
MultiScanResult fused_multi_target_scan(const std::vector<Level1Event>& events,
                                        const SessionDescriptor& descriptor,
                                        const ExtractionConfig& cfg);

// Episode dump CSV: v,V_T,direction,V_I,impact_ticks,duration_ns,total_traded,
// participation,accepted
void write_episodes_csv(const std::string& path, const MultiScanResult& result);

struct EpisodeRow {
    double v = 0.0;
    ImbalanceEpisode episode;
    double participation = 0.0;
};
std::vector<EpisodeRow> read_episodes_csv(const std::string& path);

}  // namespace tickimpact
