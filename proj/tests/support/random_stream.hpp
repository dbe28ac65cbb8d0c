#pragma once

// Seeded random Level-1 streams for differential and property tests.
// Books stay two-sided and uncrossed; trade prints land at the touch, inside
// the spread, or through it so all three trade signs occur.

#include <cstdint>
#include <random>
#include <vector>

#include "tickimpact/events.hpp"

namespace tickimpact::testsupport {

struct RandomStream {
    std::vector<Level1Event> events;
    SessionDescriptor descriptor;
    int64_t target_vt = 0;
};

inline RandomStream make_random_stream(uint64_t seed, size_t max_events = 500) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); };

    RandomStream out;
    out.descriptor.instrument = "RND";
    out.descriptor.tick_size = 0.01;
    out.descriptor.session_start_ns = 0;

    int64_t bid_ticks = 10000;
    int64_t ask_ticks = 10001;
    int64_t ts = 1000;
    auto px = [&](int64_t ticks) { return static_cast<double>(ticks) * 0.01; };

    size_t n_events = 20 + static_cast<size_t>(pick(static_cast<int>(max_events) - 19));
    out.events.push_back(
        Level1Event::quote(ts, px(bid_ticks), px(ask_ticks), 5 + pick(46), 5 + pick(46)));

    for (size_t i = 1; i < n_events; ++i) {
        ts += 1 + pick(5'000'000);
        if (pick(100) < 55) {
            // quote: occasionally shift the book, occasionally widen it
            int move = pick(100);
            if (move < 15) {
                ++bid_ticks;
                ++ask_ticks;
            } else if (move < 30) {
                --bid_ticks;
                --ask_ticks;
            } else if (move < 38 && ask_ticks - bid_ticks < 3) {
                --bid_ticks;  // widen
            } else if (move < 46 && ask_ticks - bid_ticks > 1) {
                ++bid_ticks;  // tighten
            }
            out.events.push_back(Level1Event::quote(ts, px(bid_ticks), px(ask_ticks),
                                                    5 + pick(46), 5 + pick(46)));
        } else {
            int kind = pick(100);
            double price;
            if (kind < 30) price = px(ask_ticks);                 // +1
            else if (kind < 60) price = px(bid_ticks);            // -1
            else if (kind < 80) price = (px(bid_ticks) + px(ask_ticks)) / 2.0;  // 0
            else if (kind < 90) price = px(ask_ticks + 1 + pick(2));            // +1, through
            else price = px(bid_ticks - 1 - pick(2));                           // -1, through
            out.events.push_back(Level1Event::trade(ts, price, 1 + pick(30)));
        }
    }

    out.descriptor.session_end_ns = ts + 1 + pick(10'000'000);
    out.target_vt = 5 + pick(76);
    return out;
}

}  // namespace tickimpact::testsupport
