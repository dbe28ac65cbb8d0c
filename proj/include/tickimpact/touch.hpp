#pragma once

#include <cstdint>
#include <vector>

#include "tickimpact/book.hpp"
#include "tickimpact/events.hpp"

namespace tickimpact {

// Duration-weighted symmetric touch size over a session:
// mean of (bid_size + ask_size)/2 across the intervals between quote updates,
// with the last interval extended to the session end. Intervals where the
// book is one-sided or crossed carry no weight and are counted.
class TouchAccumulator {
public:
    void on_quote(const BookState& book, int64_t timestamp_ns) {
        close_interval(timestamp_ns);
        current_valid_ = book.valid();
        current_touch_ = current_valid_ ? book.touch() : 0.0;
        current_start_ = timestamp_ns;
        have_current_ = true;
        if (current_valid_) saw_valid_quote_ = true;
        last_touch_ = current_valid_ ? current_touch_ : last_touch_;
    }

    void finish(int64_t session_end_ns) {
        close_interval(session_end_ns);
        have_current_ = false;
        finished_ = true;
    }

    double value() const {
        if (!saw_valid_quote_)
            throw TickError(ErrorCode::EmptySession, "no two-sided quotes in session");
        if (weighted_duration_ <= 0.0) return last_touch_;  // degenerate: zero-length session
        return weighted_sum_ / weighted_duration_;
    }

    bool has_samples() const { return saw_valid_quote_; }
    int64_t invalid_intervals() const { return invalid_intervals_; }
    double min_touch() const { return min_touch_; }
    double max_touch() const { return max_touch_; }

private:
    void close_interval(int64_t now_ns) {
        if (!have_current_) return;
        double dur = static_cast<double>(now_ns - current_start_);
        if (dur <= 0.0) return;
        if (current_valid_) {
            weighted_sum_ += dur * current_touch_;
            weighted_duration_ += dur;
            if (current_touch_ < min_touch_) min_touch_ = current_touch_;
            if (current_touch_ > max_touch_) max_touch_ = current_touch_;
        } else {
            ++invalid_intervals_;
        }
    }

    double weighted_sum_ = 0.0;
    double weighted_duration_ = 0.0;
    double current_touch_ = 0.0;
    int64_t current_start_ = 0;
    bool current_valid_ = false;
    bool have_current_ = false;
    bool saw_valid_quote_ = false;
    bool finished_ = false;
    double last_touch_ = 0.0;
    int64_t invalid_intervals_ = 0;
    double min_touch_ = 1e300;
    double max_touch_ = -1e300;
};

inline double time_weighted_touch(const std::vector<Level1Event>& events,
                                  const SessionDescriptor& descriptor) {
    TouchAccumulator acc;
    BookState book;
    book.tick_size = descriptor.tick_size;
    for (const Level1Event& event : events) {
        if (!event.is_quote()) continue;
        book = apply_event(book, event);
        acc.on_quote(book, event.timestamp_ns);
    }
    acc.finish(descriptor.session_end_ns);
    return acc.value();
}

}  // namespace tickimpact
