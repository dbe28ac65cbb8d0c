#include "tickimpact/simulator.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tickimpact/tick_file.hpp"

namespace tickimpact {

namespace {
constexpr int64_t kNever = std::numeric_limits<int64_t>::max();
}

void SimConfig::validate() const {
    if (session_length_s <= 0.0)
        throw TickError(ErrorCode::ConfigInvalid, "session_length_s must be > 0");
    if (tick_size <= 0.0) throw TickError(ErrorCode::ConfigInvalid, "tick_size must be > 0");
    if (touch_target < 1)
        throw TickError(ErrorCode::ConfigInvalid, "touch_target must be >= 1 contract");
    if (touch_jitter < 0 || touch_jitter >= touch_target)
        throw TickError(ErrorCode::ConfigInvalid, "touch_jitter must be in [0, touch_target)");
    if (replenish_delay_s < 0.0)
        throw TickError(ErrorCode::ConfigInvalid, "replenish_delay_s must be >= 0");
    if (noise_rate_per_side <= 0.0)
        throw TickError(ErrorCode::ConfigInvalid, "noise_rate_per_side must be > 0");
    if (noise_mean_size < 1.0)
        throw TickError(ErrorCode::ConfigInvalid, "noise_mean_size must be >= 1");
    if (quote_churn_rate < 0.0)
        throw TickError(ErrorCode::ConfigInvalid, "quote_churn_rate must be >= 0");
    if (requote_delay_s < 0.0)
        throw TickError(ErrorCode::ConfigInvalid, "requote_delay_s must be >= 0");

    // The book opens at initial_mid with a one-tick spread, so the mid must
    // sit exactly between two grid prices.
    double half_ticks = initial_mid / (tick_size / 2.0);
    double rounded = std::round(half_ticks);
    if (std::abs(half_ticks - rounded) > 1e-6 || (static_cast<int64_t>(rounded) % 2) == 0)
        throw TickError(ErrorCode::ConfigInvalid,
                        "initial_mid must lie on a half-tick between two grid prices");

    if (informed) {
        if (informed->target_vt < 1)
            throw TickError(ErrorCode::ConfigInvalid, "informed target_vt must be >= 1");
        if (informed->pov_rate <= 0.0 || informed->pov_rate > 1.0)
            throw TickError(ErrorCode::ConfigInvalid, "informed pov_rate must be in (0, 1]");
        if (informed->spacing_s <= 0.0)
            throw TickError(ErrorCode::ConfigInvalid, "informed spacing_s must be > 0");
    }
}

SessionGenerator::SessionGenerator(const SimConfig& config) : cfg_(config), rng_(config.seed) {
    cfg_.validate();
    session_end_ = cfg_.session_end_ns();

    double half_ticks = std::round(cfg_.initial_mid / (cfg_.tick_size / 2.0));
    bid_ticks_ = (static_cast<int64_t>(half_ticks) - 1) / 2;
    ask_ticks_ = bid_ticks_ + 1;
    bid_size_ = cfg_.touch_target;
    ask_size_ = cfg_.touch_target;

    for (auto& t : next_time_) t = kNever;
    int64_t start = cfg_.session_start_ns;
    schedule(Process::NoiseBuy, start + exp_gap_ns(cfg_.noise_rate_per_side));
    schedule(Process::NoiseSell, start + exp_gap_ns(cfg_.noise_rate_per_side));
    if (cfg_.quote_churn_rate > 0.0)
        schedule(Process::Churn, start + exp_gap_ns(cfg_.quote_churn_rate));
    if (cfg_.informed)
        schedule(Process::Informed,
                 start + static_cast<int64_t>(cfg_.informed->spacing_s * 1e9));

    emit_book_quote(start);  // opening two-sided quote
}

double SessionGenerator::uniform01() {
    uint64_t bits = rng_() >> 11;
    double u = static_cast<double>(bits) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

int64_t SessionGenerator::exp_gap_ns(double rate_per_s) {
    double gap_s = -std::log(uniform01()) / rate_per_s;
    int64_t ns = static_cast<int64_t>(gap_s * 1e9);
    return ns < 1 ? 1 : ns;
}

int64_t SessionGenerator::geometric_size(double mean) {
    if (mean <= 1.0) return 1;
    double q = 1.0 - 1.0 / mean;
    int64_t k = 1 + static_cast<int64_t>(std::floor(std::log(uniform01()) / std::log(q)));
    return k < 1 ? 1 : k;
}

int64_t SessionGenerator::draw_refill() {
    if (cfg_.touch_jitter == 0) return cfg_.touch_target;
    int64_t span = 2 * cfg_.touch_jitter + 1;
    int64_t offset = static_cast<int64_t>(rng_() % static_cast<uint64_t>(span)) - cfg_.touch_jitter;
    int64_t size = cfg_.touch_target + offset;
    return size < 1 ? 1 : size;
}

void SessionGenerator::emit_book_quote(int64_t ts) {
    out_.push_back(Level1Event::quote(ts, static_cast<double>(bid_ticks_) * cfg_.tick_size,
                                      static_cast<double>(ask_ticks_) * cfg_.tick_size,
                                      bid_size_, ask_size_));
}

int64_t SessionGenerator::do_market(Side side, int64_t ts, int64_t size_request) {
    int64_t& level_size = side == Side::Buy ? ask_size_ : bid_size_;
    int64_t& level_ticks = side == Side::Buy ? ask_ticks_ : bid_ticks_;

    int64_t executed = size_request < level_size ? size_request : level_size;
    out_.push_back(
        Level1Event::trade(ts, static_cast<double>(level_ticks) * cfg_.tick_size, executed));
    total_executed_ += executed;
    ++trade_count_;
    level_size -= executed;

    if (level_size == 0) {
        // Level consumed: the side steps one tick away and a fresh level
        // appears behind it.
        level_ticks += side == Side::Buy ? 1 : -1;
        level_size = draw_refill();
        last_stepped_ = side;
        if (cfg_.requote_inside && ask_ticks_ - bid_ticks_ > 1 &&
            scheduled(Process::Requote) == kNever)
            schedule(Process::Requote,
                     ts + static_cast<int64_t>(cfg_.requote_delay_s * 1e9) + 1);
    } else if (cfg_.replenish_delay_s == 0.0) {
        level_size = draw_refill();
    } else {
        Process refill = side == Side::Buy ? Process::RefillAsk : Process::RefillBid;
        if (scheduled(refill) == kNever)
            schedule(refill, ts + static_cast<int64_t>(cfg_.replenish_delay_s * 1e9) + 1);
    }

    emit_book_quote(ts);
    return executed;
}

void SessionGenerator::open_informed_window(int64_t now) {
    const InformedConfig& inf = *cfg_.informed;
    window_active_ = true;
    window_started_ = false;
    window_informed_ = 0;
    window_noise_ = 0;
    window_total_ = 0;

    switch (inf.direction) {
        case InformedConfig::Direction::Buy: window_side_ = Side::Buy; break;
        case InformedConfig::Direction::Sell: window_side_ = Side::Sell; break;
        case InformedConfig::Direction::Alternate:
            window_side_ = (episode_counter_ % 2 == 0) ? Side::Buy : Side::Sell;
            break;
    }

    if (inf.style == InformedConfig::Style::Aggressive) {
        sweep_remaining_ = inf.target_vt;
        schedule(Process::Informed, now);
    } else {
        // PoV waits for noise flow; reactions are scheduled from noise trades.
        schedule(Process::Informed, kNever);
    }
}

void SessionGenerator::close_informed_window(int64_t now) {
    GroundTruthRecord rec;
    rec.episode_id = episode_counter_++;
    rec.t_start_ns = window_t_first_;
    rec.t_end_ns = window_t_last_;
    rec.target_vt = cfg_.informed->target_vt;
    rec.style = cfg_.informed->style == InformedConfig::Style::Aggressive ? "aggressive" : "pov";
    rec.true_participation =
        static_cast<double>(window_informed_) / static_cast<double>(window_total_);
    truth_.push_back(rec);

    window_active_ = false;
    sweep_remaining_ = 0;
    int64_t next_open = now + static_cast<int64_t>(cfg_.informed->spacing_s * 1e9);
    schedule(Process::Informed, next_open);
}

void SessionGenerator::informed_fire(int64_t now) {
    const InformedConfig& inf = *cfg_.informed;

    if (!window_active_) {
        open_informed_window(now);
        return;
    }

    int64_t want = 0;
    if (inf.style == InformedConfig::Style::Aggressive) {
        want = sweep_remaining_;
    } else {
        // Top up so that informed/(informed+noise) tracks pov_rate.
        double deficit = inf.pov_rate * static_cast<double>(window_noise_) /
                             (1.0 - inf.pov_rate) -
                         static_cast<double>(window_informed_);
        want = static_cast<int64_t>(std::ceil(deficit));
        if (want < 0) want = 0;
        int64_t remaining = inf.target_vt - window_informed_;
        if (want > remaining) want = remaining;
        if (want == 0) {
            schedule(Process::Informed, kNever);
            return;
        }
    }

    int64_t executed = do_market(window_side_, now, want);
    window_informed_ += executed;
    if (!window_started_) {
        window_started_ = true;
        window_t_first_ = now;
    }
    window_t_last_ = now;
    window_total_ += executed;

    if (window_informed_ >= inf.target_vt) {
        close_informed_window(now);
        return;
    }

    if (inf.style == InformedConfig::Style::Aggressive) {
        sweep_remaining_ -= executed;
        schedule(Process::Informed, now + 1);  // keep sweeping
    } else {
        // Reached schedule for current noise volume (or hit the touch cap);
        // re-fire immediately only if still behind, otherwise wait for noise.
        double behind = inf.pov_rate * static_cast<double>(window_noise_) / (1.0 - inf.pov_rate) -
                        static_cast<double>(window_informed_);
        if (behind >= 1.0)
            schedule(Process::Informed, now + 1);
        else
            schedule(Process::Informed, kNever);
    }
}

void SessionGenerator::informed_on_noise_trade(int64_t ts, int64_t executed) {
    if (!window_active_) return;
    window_noise_ += executed;
    if (window_started_) window_total_ += executed;
    if (cfg_.informed->style == InformedConfig::Style::PoV &&
        scheduled(Process::Informed) == kNever)
        schedule(Process::Informed, ts + 1);
}

void SessionGenerator::dispatch(Process p, int64_t now) {
    switch (p) {
        case Process::RefillBid:
            schedule(Process::RefillBid, kNever);
            bid_size_ = draw_refill();
            emit_book_quote(now);
            break;
        case Process::RefillAsk:
            schedule(Process::RefillAsk, kNever);
            ask_size_ = draw_refill();
            emit_book_quote(now);
            break;
        case Process::Requote: {
            schedule(Process::Requote, kNever);
            if (ask_ticks_ - bid_ticks_ > 1) {
                // The side opposite the last step follows in to restore a
                // one-tick spread.
                if (last_stepped_ == Side::Buy) {
                    bid_ticks_ = ask_ticks_ - 1;
                    bid_size_ = draw_refill();
                } else {
                    ask_ticks_ = bid_ticks_ + 1;
                    ask_size_ = draw_refill();
                }
                emit_book_quote(now);
            }
            break;
        }
        case Process::Informed:
            informed_fire(now);
            break;
        case Process::NoiseBuy:
        case Process::NoiseSell: {
            schedule(p, now + exp_gap_ns(cfg_.noise_rate_per_side));
            int64_t size = geometric_size(cfg_.noise_mean_size);
            int64_t executed =
                do_market(p == Process::NoiseBuy ? Side::Buy : Side::Sell, now, size);
            informed_on_noise_trade(now, executed);
            break;
        }
        case Process::Churn: {
            schedule(Process::Churn, now + exp_gap_ns(cfg_.quote_churn_rate));
            if (rng_() & 1)
                bid_size_ = draw_refill();
            else
                ask_size_ = draw_refill();
            emit_book_quote(now);
            break;
        }
        case Process::Count: break;
    }
}

bool SessionGenerator::advance() {
    while (out_.empty()) {
        int64_t best = kNever;
        int best_idx = -1;
        for (int i = 0; i < static_cast<int>(Process::Count); ++i) {
            if (next_time_[static_cast<size_t>(i)] < best) {
                best = next_time_[static_cast<size_t>(i)];
                best_idx = i;
            }
        }
        if (best_idx < 0 || best >= session_end_) return false;
        dispatch(static_cast<Process>(best_idx), best);
    }
    return true;
}

bool SessionGenerator::next(Level1Event& event) {
    if (out_.empty() && !advance()) return false;
    event = out_.front();
    out_.pop_front();
    return true;
}

SimSession generate_session(const SimConfig& config) {
    SessionGenerator gen(config);
    SimSession session;
    Level1Event event;
    while (gen.next(event)) session.events.push_back(event);
    session.truth = gen.ground_truth();
    session.total_executed = gen.total_executed();
    return session;
}

std::vector<GroundTruthRecord> generate_session_to_file(const SimConfig& config,
                                                        const std::string& tick_path,
                                                        int64_t* total_executed,
                                                        int64_t* n_events) {
    SessionGenerator gen(config);
    std::FILE* f = std::fopen(tick_path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write tick file: " + tick_path);
    std::string chunk;
    chunk.reserve(1 << 22);
    Level1Event event;
    int64_t count = 0;
    while (gen.next(event)) {
        append_event(chunk, event);
        ++count;
        if (chunk.size() > (1 << 22) - 128) {
            std::fwrite(chunk.data(), 1, chunk.size(), f);
            chunk.clear();
        }
    }
    if (!chunk.empty()) std::fwrite(chunk.data(), 1, chunk.size(), f);
    std::fclose(f);
    if (total_executed) *total_executed = gen.total_executed();
    if (n_events) *n_events = count;
    return gen.ground_truth();
}

void write_truth_csv(const std::string& path, const std::vector<GroundTruthRecord>& truth) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write truth csv: " + path);
    std::string out = "episode_id,t_start_ns,t_end_ns,V_T,style,true_participation\n";
    for (const GroundTruthRecord& r : truth) {
        out += std::to_string(r.episode_id) + ',' + std::to_string(r.t_start_ns) + ',' +
               std::to_string(r.t_end_ns) + ',' + std::to_string(r.target_vt) + ',' + r.style +
               ',' + format_double(r.true_participation) + '\n';
    }
    std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
}

std::vector<GroundTruthRecord> read_truth_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot open truth csv: " + path);
    std::string text;
    char buf[1 << 16];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
    std::fclose(f);

    std::vector<GroundTruthRecord> records;
    size_t start = 0;
    int64_t line_no = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line(text.data() + start,
                              (nl == std::string::npos ? text.size() : nl) - start);
        start = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (line_no == 1 || line.empty()) continue;

        GroundTruthRecord rec;
        std::string_view fields[6];
        size_t fstart = 0;
        for (int i = 0; i < 6; ++i) {
            size_t comma = line.find(',', fstart);
            bool last = i == 5;
            if (!last && comma == std::string_view::npos)
                throw TickError(ErrorCode::MalformedLine, "bad truth row", line_no);
            fields[i] = line.substr(fstart, (last ? line.size() : comma) - fstart);
            fstart = comma + 1;
        }
        auto i64 = [&](std::string_view s) {
            int64_t v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
                throw TickError(ErrorCode::MalformedLine, "bad integer in truth row", line_no);
            return v;
        };
        rec.episode_id = i64(fields[0]);
        rec.t_start_ns = i64(fields[1]);
        rec.t_end_ns = i64(fields[2]);
        rec.target_vt = i64(fields[3]);
        rec.style = std::string(fields[4]);
        double v = 0.0;
        auto [p, ec] = std::from_chars(fields[5].data(), fields[5].data() + fields[5].size(), v);
        if (ec != std::errc())
            throw TickError(ErrorCode::MalformedLine, "bad participation in truth row", line_no);
        rec.true_participation = v;
        records.push_back(std::move(rec));
    }
    return records;
}

SimConfig read_sim_config(const std::string& path) {
    auto pairs = read_key_value_file(path);
    SimConfig cfg;
    bool saw_seed = false;
    bool informed_enabled = false;
    InformedConfig inf;

    auto to_f = [](const std::string& key, const std::string& v) {
        double d = 0.0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
        if (ec != std::errc() || p != v.data() + v.size())
            throw TickError(ErrorCode::ConfigInvalid, "bad numeric value for key: " + key);
        return d;
    };
    auto to_i = [&](const std::string& key, const std::string& v) {
        return static_cast<int64_t>(to_f(key, v));
    };

    for (const auto& [key, value] : pairs) {
        if (key == "seed") {
            uint64_t s = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
            if (ec != std::errc() || p != value.data() + value.size())
                throw TickError(ErrorCode::ConfigInvalid, "bad value for key: seed");
            cfg.seed = s;
            saw_seed = true;
        } else if (key == "instrument") cfg.instrument = value;
        else if (key == "session_length_s") cfg.session_length_s = to_f(key, value);
        else if (key == "tick_size") cfg.tick_size = to_f(key, value);
        else if (key == "initial_mid") cfg.initial_mid = to_f(key, value);
        else if (key == "touch_target") cfg.touch_target = to_i(key, value);
        else if (key == "touch_jitter") cfg.touch_jitter = to_i(key, value);
        else if (key == "replenish_delay_s") cfg.replenish_delay_s = to_f(key, value);
        else if (key == "noise_rate_per_side") cfg.noise_rate_per_side = to_f(key, value);
        else if (key == "noise_mean_size") cfg.noise_mean_size = to_f(key, value);
        else if (key == "quote_churn_rate") cfg.quote_churn_rate = to_f(key, value);
        else if (key == "requote_inside") cfg.requote_inside = to_i(key, value) != 0;
        else if (key == "requote_delay_s") cfg.requote_delay_s = to_f(key, value);
        else if (key == "session_start_ns") cfg.session_start_ns = to_i(key, value);
        else if (key == "informed_style") {
            informed_enabled = true;
            if (value == "aggressive") inf.style = InformedConfig::Style::Aggressive;
            else if (value == "pov") inf.style = InformedConfig::Style::PoV;
            else
                throw TickError(ErrorCode::ConfigInvalid,
                                "informed_style must be aggressive or pov");
        } else if (key == "informed_target_vt") { informed_enabled = true; inf.target_vt = to_i(key, value); }
        else if (key == "informed_pov_rate") { informed_enabled = true; inf.pov_rate = to_f(key, value); }
        else if (key == "informed_spacing_s") { informed_enabled = true; inf.spacing_s = to_f(key, value); }
        else if (key == "informed_direction") {
            informed_enabled = true;
            if (value == "alternate") inf.direction = InformedConfig::Direction::Alternate;
            else if (value == "buy") inf.direction = InformedConfig::Direction::Buy;
            else if (value == "sell") inf.direction = InformedConfig::Direction::Sell;
            else
                throw TickError(ErrorCode::ConfigInvalid,
                                "informed_direction must be alternate, buy or sell");
        } else {
            throw TickError(ErrorCode::ConfigInvalid, "unknown config key: " + key);
        }
    }
    if (!saw_seed) throw TickError(ErrorCode::ConfigInvalid, "missing config key: seed");
    if (informed_enabled) cfg.informed = inf;
    cfg.validate();
    return cfg;
}

void write_sim_config(const std::string& path, const SimConfig& cfg) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write config: " + path);
    std::string out;
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "instrument = " + cfg.instrument + "\n";
    out += "session_length_s = " + format_double(cfg.session_length_s) + "\n";
    out += "tick_size = " + format_double(cfg.tick_size) + "\n";
    out += "initial_mid = " + format_double(cfg.initial_mid) + "\n";
    out += "touch_target = " + std::to_string(cfg.touch_target) + "\n";
    out += "touch_jitter = " + std::to_string(cfg.touch_jitter) + "\n";
    out += "replenish_delay_s = " + format_double(cfg.replenish_delay_s) + "\n";
    out += "noise_rate_per_side = " + format_double(cfg.noise_rate_per_side) + "\n";
    out += "noise_mean_size = " + format_double(cfg.noise_mean_size) + "\n";
    out += "quote_churn_rate = " + format_double(cfg.quote_churn_rate) + "\n";
    out += "requote_inside = " + std::string(cfg.requote_inside ? "1" : "0") + "\n";
    out += "requote_delay_s = " + format_double(cfg.requote_delay_s) + "\n";
    out += "session_start_ns = " + std::to_string(cfg.session_start_ns) + "\n";
    if (cfg.informed) {
        const InformedConfig& inf = *cfg.informed;
        out += "informed_style = ";
        out += inf.style == InformedConfig::Style::Aggressive ? "aggressive" : "pov";
        out += "\n";
        out += "informed_target_vt = " + std::to_string(inf.target_vt) + "\n";
        out += "informed_pov_rate = " + format_double(inf.pov_rate) + "\n";
        out += "informed_spacing_s = " + format_double(inf.spacing_s) + "\n";
        out += "informed_direction = ";
        switch (inf.direction) {
            case InformedConfig::Direction::Alternate: out += "alternate"; break;
            case InformedConfig::Direction::Buy: out += "buy"; break;
            case InformedConfig::Direction::Sell: out += "sell"; break;
        }
        out += "\n";
    }
    std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
}

ReplayDiagnostics replay_check(const std::vector<Level1Event>& events,
                               const SessionDescriptor& descriptor) {
    ReplayDiagnostics diag;
    double tick = descriptor.tick_size;
    double grid_tol = tick * 1e-6;
    auto on_grid = [&](double price) {
        double ticks = price / tick;
        return std::abs(ticks - std::round(ticks)) <= grid_tol / tick + 1e-9;
    };

    int64_t prev_ts = INT64_MIN;
    for (size_t i = 0; i < events.size(); ++i) {
        const Level1Event& e = events[i];
        int64_t idx = static_cast<int64_t>(i);
        ++diag.n_events;
        if (e.timestamp_ns < prev_ts)
            diag.violations.push_back({idx, "timestamp decreased"});
        prev_ts = e.timestamp_ns;

        if (e.is_trade()) {
            ++diag.n_trades;
            if (e.trade_size <= 0) diag.violations.push_back({idx, "non-positive trade size"});
            if (!on_grid(e.trade_price))
                diag.violations.push_back({idx, "trade price off the tick grid"});
        } else {
            ++diag.n_quotes;
            if (e.has_bid() && !on_grid(e.bid_price))
                diag.violations.push_back({idx, "bid price off the tick grid"});
            if (e.has_ask() && !on_grid(e.ask_price))
                diag.violations.push_back({idx, "ask price off the tick grid"});
            if (e.has_bid() && e.has_ask() &&
                e.ask_price - e.bid_price < tick * (1.0 - 1e-6))
                diag.violations.push_back({idx, "spread below one tick"});
        }
    }

    double dur_s =
        static_cast<double>(descriptor.session_end_ns - descriptor.session_start_ns) * 1e-9;
    if (dur_s > 0.0) {
        diag.events_per_s = static_cast<double>(diag.n_events) / dur_s;
        diag.trades_per_s = static_cast<double>(diag.n_trades) / dur_s;
    }
    return diag;
}

}  // namespace tickimpact
