#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tickimpact/events.hpp"

namespace tickimpact {

// Optional directional trader layered on the balanced noise flow.
struct InformedConfig {
    enum class Style { Aggressive, PoV };
    enum class Direction { Alternate, Buy, Sell };

    int64_t target_vt = 14;      // contracts per scheduled episode
    Style style = Style::Aggressive;
    double pov_rate = 0.2;       // target share of window volume (PoV style)
    double spacing_s = 10.0;     // gap between an episode's end and the next start
    Direction direction = Direction::Alternate;
};

// Equilibrium market: balanced Poisson noise flow on both sides against a
// replenishing market maker, plus the optional informed trader. All
// randomness flows from the single seed.
struct SimConfig {
    uint64_t seed = 1;
    std::string instrument = "SYN";
    double session_length_s = 600.0;
    double tick_size = 0.01;
    double initial_mid = 100.005;   // must sit on a half-tick
    int64_t touch_target = 14;      // replenish target per side, contracts
    int64_t touch_jitter = 0;       // refill size = target +- U{0..jitter}
    double replenish_delay_s = 0.0; // 0: partial fills top up immediately
    double noise_rate_per_side = 1.0;  // trades/second per side
    double noise_mean_size = 5.0;      // geometric size distribution mean
    double quote_churn_rate = 0.0;     // size-only quote updates per second
    bool requote_inside = true;        // opposite side follows a stepped level
    double requote_delay_s = 0.05;
    std::optional<InformedConfig> informed;
    int64_t session_start_ns = 0;

    int64_t session_end_ns() const {
        return session_start_ns + static_cast<int64_t>(session_length_s * 1e9);
    }
    SessionDescriptor descriptor() const {
        return SessionDescriptor{instrument, tick_size, session_start_ns, session_end_ns()};
    }
    void validate() const;
};

// Oracle label for one completed informed episode.
struct GroundTruthRecord {
    int64_t episode_id = 0;
    int64_t t_start_ns = 0;  // first informed trade
    int64_t t_end_ns = 0;    // last informed trade
    int64_t target_vt = 0;
    std::string style;       // "aggressive" or "pov"
    double true_participation = 0.0;  // informed volume / total volume in window
};

// Pull-based generator: call next() until it returns false. Deterministic
// for a fixed config; ground truth is complete once the stream is drained.
class SessionGenerator {
public:
    explicit SessionGenerator(const SimConfig& config);

    bool next(Level1Event& event);

    const std::vector<GroundTruthRecord>& ground_truth() const { return truth_; }
    int64_t total_executed() const { return total_executed_; }
    int64_t trade_count() const { return trade_count_; }

private:
    enum class Process : int {
        RefillBid,
        RefillAsk,
        Requote,
        Informed,
        NoiseBuy,
        NoiseSell,
        Churn,
        Count
    };
    enum class Side { Buy, Sell };

    bool advance();
    void dispatch(Process p, int64_t now);
    int64_t do_market(Side side, int64_t ts, int64_t size_request);
    void emit_book_quote(int64_t ts);
    void schedule(Process p, int64_t when) { next_time_[static_cast<size_t>(p)] = when; }
    int64_t scheduled(Process p) const { return next_time_[static_cast<size_t>(p)]; }

    double uniform01();
    int64_t exp_gap_ns(double rate_per_s);
    int64_t geometric_size(double mean);
    int64_t draw_refill();

    void informed_fire(int64_t now);
    void informed_on_noise_trade(int64_t ts, int64_t executed);
    void open_informed_window(int64_t now);
    void close_informed_window(int64_t now);

    SimConfig cfg_;
    std::mt19937_64 rng_;
    std::deque<Level1Event> out_;

    // book in integer ticks
    int64_t bid_ticks_ = 0;
    int64_t ask_ticks_ = 0;
    int64_t bid_size_ = 0;
    int64_t ask_size_ = 0;
    Side last_stepped_ = Side::Buy;

    int64_t session_end_ = 0;
    int64_t next_time_[static_cast<size_t>(Process::Count)];

    // informed state
    bool window_active_ = false;
    bool window_started_ = false;  // first informed trade done
    Side window_side_ = Side::Buy;
    int64_t window_informed_ = 0;
    int64_t window_noise_ = 0;     // noise volume since window open (pacing input)
    int64_t window_total_ = 0;     // all volume since first informed trade
    int64_t window_t_first_ = 0;
    int64_t window_t_last_ = 0;
    int64_t sweep_remaining_ = 0;  // aggressive style
    int64_t episode_counter_ = 0;

    std::vector<GroundTruthRecord> truth_;
    int64_t total_executed_ = 0;
    int64_t trade_count_ = 0;
};

struct SimSession {
    std::vector<Level1Event> events;
    std::vector<GroundTruthRecord> truth;
    int64_t total_executed = 0;
};

SimSession generate_session(const SimConfig& config);

// Streams straight to a canonical tick file; returns the ground truth.
std::vector<GroundTruthRecord> generate_session_to_file(const SimConfig& config,
                                                        const std::string& tick_path,
                                                        int64_t* total_executed = nullptr,
                                                        int64_t* n_events = nullptr);

void write_truth_csv(const std::string& path, const std::vector<GroundTruthRecord>& truth);
std::vector<GroundTruthRecord> read_truth_csv(const std::string& path);

SimConfig read_sim_config(const std::string& path);
void write_sim_config(const std::string& path, const SimConfig& config);

// Stream validation: format met by construction, timestamps non-decreasing,
// book never crossed or locked, prices on the tick grid. Violations carry the
// 0-based event index.
struct ReplayDiagnostics {
    struct Violation {
        int64_t index;
        std::string what;
    };
    std::vector<Violation> violations;
    int64_t n_events = 0;
    int64_t n_trades = 0;
    int64_t n_quotes = 0;
    double events_per_s = 0.0;
    double trades_per_s = 0.0;
};

ReplayDiagnostics replay_check(const std::vector<Level1Event>& events,
                               const SessionDescriptor& descriptor);

}  // namespace tickimpact
