#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "tickimpact/events.hpp"

namespace tickimpact {

// Parses one CSV line of the canonical tick format:
//   timestamp_ns,kind,trade_price,trade_size,bid_price,ask_price,bid_size,ask_size
// kind is T or Q; unused fields are empty. Throws TickError on bad input.
Level1Event parse_tick_line(std::string_view line, int64_t line_number);

// True if the line looks like a header (first field not numeric).
bool is_header_line(std::string_view line);

void append_event(std::string& out, const Level1Event& event);
std::string serialize_event(const Level1Event& event);

// Streaming reader over a canonical tick file. Buffered single pass; detects
// an optional header line and enforces non-decreasing timestamps.
class TickFileReader {
public:
    explicit TickFileReader(const std::string& path);
    ~TickFileReader();

    TickFileReader(const TickFileReader&) = delete;
    TickFileReader& operator=(const TickFileReader&) = delete;

    // Fills `event` with the next event; false at end of file.
    bool next(Level1Event& event);

    int64_t line_number() const { return line_number_; }

private:
    bool fill_buffer();

    std::FILE* file_ = nullptr;
    std::vector<char> buffer_;
    size_t pos_ = 0;
    size_t len_ = 0;
    std::string carry_;
    int64_t line_number_ = 0;
    int64_t prev_ts_ = INT64_MIN;
    bool first_line_ = true;
    bool eof_ = false;
};

// In-memory parse of a whole tick stream (text form), used for small inputs
// and tests. Same validation as the file reader.
std::vector<Level1Event> parse_events(std::string_view text);

std::vector<Level1Event> read_tick_file(const std::string& path);
void write_tick_file(const std::string& path, const std::vector<Level1Event>& events);

SessionDescriptor read_descriptor(const std::string& path);
void write_descriptor(const std::string& path, const SessionDescriptor& descriptor);

// Shared helpers for the toolkit's key = value sidecar files.
std::vector<std::pair<std::string, std::string>> read_key_value_file(const std::string& path);
std::string format_double(double value);  // shortest round-trip form, '.' separator

}  // namespace tickimpact
