#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tickimpact {

enum class ErrorCode {
    MalformedLine,
    NonMonotonicTimestamp,
    UnknownEventKind,
    EmptySession,
    NoQuoteYet,
    ZeroVolumeWindow,
    ConfigInvalid,
    DegenerateDesign,
    IoError,
};

// Toolkit-wide error with a machine-checkable code. Parse errors carry the
// 1-based line number of the offending input line.
class TickError : public std::runtime_error {
public:
    TickError(ErrorCode code, const std::string& what, int64_t line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          code_(code),
          line_(line) {}

    ErrorCode code() const { return code_; }
    int64_t line() const { return line_; }

private:
    ErrorCode code_;
    int64_t line_;
};

enum class EventKind : uint8_t { Trade, Quote };

// One Level-1 tick: either a trade print or a best bid/offer update.
// Quote sides are optional; a side is present iff its size is > 0.
struct Level1Event {
    int64_t timestamp_ns = 0;
    EventKind kind = EventKind::Quote;

    double trade_price = 0.0;
    int64_t trade_size = 0;

    double bid_price = 0.0;
    double ask_price = 0.0;
    int64_t bid_size = 0;
    int64_t ask_size = 0;

    bool is_trade() const { return kind == EventKind::Trade; }
    bool is_quote() const { return kind == EventKind::Quote; }
    bool has_bid() const { return is_quote() && bid_size > 0; }
    bool has_ask() const { return is_quote() && ask_size > 0; }

    static Level1Event trade(int64_t ts, double price, int64_t size) {
        Level1Event e;
        e.timestamp_ns = ts;
        e.kind = EventKind::Trade;
        e.trade_price = price;
        e.trade_size = size;
        return e;
    }

    static Level1Event quote(int64_t ts, double bid_px, double ask_px, int64_t bid_sz,
                             int64_t ask_sz) {
        Level1Event e;
        e.timestamp_ns = ts;
        e.kind = EventKind::Quote;
        e.bid_price = bid_px;
        e.ask_price = ask_px;
        e.bid_size = bid_sz;
        e.ask_size = ask_sz;
        return e;
    }
};

// Sidecar metadata for one session of one instrument.
struct SessionDescriptor {
    std::string instrument;
    double tick_size = 0.0;
    int64_t session_start_ns = 0;
    int64_t session_end_ns = 0;

    void validate() const {
        if (tick_size <= 0.0)
            throw TickError(ErrorCode::ConfigInvalid, "descriptor: tick_size must be > 0");
        if (session_start_ns >= session_end_ns)
            throw TickError(ErrorCode::ConfigInvalid,
                            "descriptor: session_start_ns must be < session_end_ns");
    }
};

}  // namespace tickimpact
