#pragma once

#include <cmath>
#include <cstdint>

#include "tickimpact/events.hpp"

namespace tickimpact {

// Current best bid/offer plus last-trade bookkeeping. Quote events replace
// the quote fields; trade events touch only the last_trade_* fields.
struct BookState {
    double bid_price = 0.0;
    double ask_price = 0.0;
    int64_t bid_size = 0;
    int64_t ask_size = 0;
    double tick_size = 0.0;
    int64_t last_quote_time = -1;

    double last_trade_price = 0.0;
    int64_t last_trade_size = 0;
    int64_t last_trade_time = -1;

    bool two_sided() const { return bid_size > 0 && ask_size > 0; }

    // Crossed books (ask below bid) have no meaningful mid; intervals spent
    // in that state are skipped and counted upstream.
    bool crossed() const {
        return two_sided() && ask_price < bid_price - 1e-6 * tick_size;
    }

    bool valid() const { return two_sided() && !crossed(); }

    double mid() const { return (bid_price + ask_price) / 2.0; }

    double touch() const { return static_cast<double>(bid_size + ask_size) / 2.0; }

    double spread() const { return ask_price - bid_price; }
};

inline BookState apply_event(BookState state, const Level1Event& event) {
    if (event.is_quote()) {
        state.bid_price = event.bid_price;
        state.ask_price = event.ask_price;
        state.bid_size = event.bid_size;
        state.ask_size = event.ask_size;
        state.last_quote_time = event.timestamp_ns;
    } else {
        state.last_trade_price = event.trade_price;
        state.last_trade_size = event.trade_size;
        state.last_trade_time = event.timestamp_ns;
    }
    return state;
}

}  // namespace tickimpact
