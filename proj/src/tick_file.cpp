#include "tickimpact/tick_file.hpp"

#include <array>
#include <charconv>
#include <cstring>

namespace tickimpact {

namespace {

constexpr size_t kReadBufferSize = 1 << 22;  // 4 MiB

bool parse_i64(std::string_view field, int64_t& out) {
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

bool parse_f64(std::string_view field, double& out) {
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

// Splits a line into exactly 8 comma-separated fields. Returns false on a
// wrong field count.
bool split_fields(std::string_view line, std::array<std::string_view, 8>& fields) {
    size_t start = 0;
    for (int i = 0; i < 7; ++i) {
        size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) return false;
        fields[static_cast<size_t>(i)] = line.substr(start, comma - start);
        start = comma + 1;
    }
    std::string_view last = line.substr(start);
    if (last.find(',') != std::string_view::npos) return false;
    fields[7] = last;
    return true;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

bool is_header_line(std::string_view line) {
    line = strip_cr(line);
    size_t comma = line.find(',');
    std::string_view first = comma == std::string_view::npos ? line : line.substr(0, comma);
    int64_t dummy;
    return !first.empty() && !parse_i64(first, dummy);
}

Level1Event parse_tick_line(std::string_view line, int64_t line_number) {
    line = strip_cr(line);

    Level1Event event;

    // Timestamp and kind are validated before the field count so that an
    // unknown kind letter reports as such even on an otherwise ragged line.
    size_t c0 = line.find(',');
    if (c0 == std::string_view::npos)
        throw TickError(ErrorCode::MalformedLine, "expected 8 comma-separated fields",
                        line_number);
    if (!parse_i64(line.substr(0, c0), event.timestamp_ns))
        throw TickError(ErrorCode::MalformedLine, "bad timestamp field", line_number);

    size_t c1 = line.find(',', c0 + 1);
    std::string_view kind =
        line.substr(c0 + 1, (c1 == std::string_view::npos ? line.size() : c1) - c0 - 1);
    if (kind != "T" && kind != "Q")
        throw TickError(ErrorCode::UnknownEventKind,
                        "unknown event kind '" + std::string(kind) + "'", line_number);
    event.kind = kind == "T" ? EventKind::Trade : EventKind::Quote;

    std::array<std::string_view, 8> f;
    if (!split_fields(line, f))
        throw TickError(ErrorCode::MalformedLine, "expected 8 comma-separated fields",
                        line_number);

    if (event.kind == EventKind::Trade) {
        if (f[2].empty() || f[3].empty())
            throw TickError(ErrorCode::MalformedLine, "trade line missing price or size",
                            line_number);
        if (!parse_f64(f[2], event.trade_price))
            throw TickError(ErrorCode::MalformedLine, "bad trade_price field", line_number);
        if (!parse_i64(f[3], event.trade_size))
            throw TickError(ErrorCode::MalformedLine, "bad trade_size field", line_number);
        if (event.trade_size <= 0)
            throw TickError(ErrorCode::MalformedLine, "trade_size must be > 0", line_number);
        if (!f[4].empty() || !f[5].empty() || !f[6].empty() || !f[7].empty())
            throw TickError(ErrorCode::MalformedLine, "trade line has quote fields",
                            line_number);
    } else {
        if (!f[2].empty() || !f[3].empty())
            throw TickError(ErrorCode::MalformedLine, "quote line has trade fields",
                            line_number);
        bool has_bid = !f[4].empty() || !f[6].empty();
        bool has_ask = !f[5].empty() || !f[7].empty();
        if (has_bid) {
            if (f[4].empty() || f[6].empty())
                throw TickError(ErrorCode::MalformedLine, "bid price/size must come together",
                                line_number);
            if (!parse_f64(f[4], event.bid_price))
                throw TickError(ErrorCode::MalformedLine, "bad bid_price field", line_number);
            if (!parse_i64(f[6], event.bid_size))
                throw TickError(ErrorCode::MalformedLine, "bad bid_size field", line_number);
            if (event.bid_size <= 0)
                throw TickError(ErrorCode::MalformedLine, "bid_size must be > 0", line_number);
        }
        if (has_ask) {
            if (f[5].empty() || f[7].empty())
                throw TickError(ErrorCode::MalformedLine, "ask price/size must come together",
                                line_number);
            if (!parse_f64(f[5], event.ask_price))
                throw TickError(ErrorCode::MalformedLine, "bad ask_price field", line_number);
            if (!parse_i64(f[7], event.ask_size))
                throw TickError(ErrorCode::MalformedLine, "bad ask_size field", line_number);
            if (event.ask_size <= 0)
                throw TickError(ErrorCode::MalformedLine, "ask_size must be > 0", line_number);
        }
        if (!has_bid && !has_ask)
            throw TickError(ErrorCode::MalformedLine, "quote line with no sides", line_number);
    }

    return event;
}

std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

void append_i64(std::string& out, int64_t value) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, res.ptr);
}

void append_f64(std::string& out, double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, res.ptr);
}

}  // namespace

void append_event(std::string& out, const Level1Event& event) {
    append_i64(out, event.timestamp_ns);
    if (event.is_trade()) {
        out += ",T,";
        append_f64(out, event.trade_price);
        out += ',';
        append_i64(out, event.trade_size);
        out += ",,,,";
    } else {
        out += ",Q,,,";
        if (event.has_bid()) append_f64(out, event.bid_price);
        out += ',';
        if (event.has_ask()) append_f64(out, event.ask_price);
        out += ',';
        if (event.has_bid()) append_i64(out, event.bid_size);
        out += ',';
        if (event.has_ask()) append_i64(out, event.ask_size);
    }
    out += '\n';
}

std::string serialize_event(const Level1Event& event) {
    std::string out;
    append_event(out, event);
    out.pop_back();  // drop the newline
    return out;
}

TickFileReader::TickFileReader(const std::string& path) : buffer_(kReadBufferSize) {
    file_ = std::fopen(path.c_str(), "rb");
    if (!file_) throw TickError(ErrorCode::IoError, "cannot open tick file: " + path);
}

TickFileReader::~TickFileReader() {
    if (file_) std::fclose(file_);
}

bool TickFileReader::fill_buffer() {
    if (eof_) return false;
    len_ = std::fread(buffer_.data(), 1, buffer_.size(), file_);
    pos_ = 0;
    if (len_ == 0) {
        eof_ = true;
        return false;
    }
    return true;
}

bool TickFileReader::next(Level1Event& event) {
    for (;;) {
        if (pos_ >= len_ && !fill_buffer()) {
            // Final line without trailing newline.
            if (!carry_.empty()) {
                std::string line;
                line.swap(carry_);
                ++line_number_;
                std::string_view sv(line);
                if (first_line_) {
                    first_line_ = false;
                    if (is_header_line(sv)) return false;
                }
                event = parse_tick_line(sv, line_number_);
                if (event.timestamp_ns < prev_ts_)
                    throw TickError(ErrorCode::NonMonotonicTimestamp,
                                    "timestamp decreased", line_number_);
                prev_ts_ = event.timestamp_ns;
                return true;
            }
            return false;
        }

        const char* start = buffer_.data() + pos_;
        const char* nl = static_cast<const char*>(std::memchr(start, '\n', len_ - pos_));
        if (!nl) {
            carry_.append(start, len_ - pos_);
            pos_ = len_;
            continue;
        }

        std::string_view line;
        size_t line_len = static_cast<size_t>(nl - start);
        if (carry_.empty()) {
            line = std::string_view(start, line_len);
        } else {
            carry_.append(start, line_len);
            line = carry_;
        }
        pos_ += line_len + 1;
        ++line_number_;

        bool skip = false;
        if (first_line_) {
            first_line_ = false;
            if (is_header_line(line)) skip = true;
        }
        if (!skip && line.empty()) skip = true;  // tolerate blank lines
        if (skip) {
            carry_.clear();
            continue;
        }

        event = parse_tick_line(line, line_number_);
        carry_.clear();
        if (event.timestamp_ns < prev_ts_)
            throw TickError(ErrorCode::NonMonotonicTimestamp, "timestamp decreased",
                            line_number_);
        prev_ts_ = event.timestamp_ns;
        return true;
    }
}

std::vector<Level1Event> parse_events(std::string_view text) {
    std::vector<Level1Event> events;
    int64_t line_number = 0;
    int64_t prev_ts = INT64_MIN;
    bool first = true;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line = nl == std::string_view::npos
                                    ? text.substr(start)
                                    : text.substr(start, nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_number;
        if (first) {
            first = false;
            if (is_header_line(line)) continue;
        }
        if (strip_cr(line).empty()) continue;
        Level1Event event = parse_tick_line(line, line_number);
        if (event.timestamp_ns < prev_ts)
            throw TickError(ErrorCode::NonMonotonicTimestamp, "timestamp decreased",
                            line_number);
        prev_ts = event.timestamp_ns;
        events.push_back(event);
    }
    return events;
}

std::vector<Level1Event> read_tick_file(const std::string& path) {
    TickFileReader reader(path);
    std::vector<Level1Event> events;
    Level1Event event;
    while (reader.next(event)) events.push_back(event);
    return events;
}

void write_tick_file(const std::string& path, const std::vector<Level1Event>& events) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write tick file: " + path);
    std::string chunk;
    chunk.reserve(1 << 20);
    for (const Level1Event& event : events) {
        append_event(chunk, event);
        if (chunk.size() > (1 << 20) - 128) {
            std::fwrite(chunk.data(), 1, chunk.size(), f);
            chunk.clear();
        }
    }
    if (!chunk.empty()) std::fwrite(chunk.data(), 1, chunk.size(), f);
    std::fclose(f);
}

std::vector<std::pair<std::string, std::string>> read_key_value_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot open file: " + path);
    std::string text;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
    std::fclose(f);

    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
            s.remove_suffix(1);
        return s;
    };

    std::vector<std::pair<std::string, std::string>> pairs;
    size_t start = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line(text.data() + start,
                              (nl == std::string::npos ? text.size() : nl) - start);
        start = nl == std::string::npos ? text.size() : nl + 1;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw TickError(ErrorCode::MalformedLine,
                            "expected key = value in " + path + ": " + std::string(line));
        pairs.emplace_back(std::string(trim(line.substr(0, eq))),
                           std::string(trim(line.substr(eq + 1))));
    }
    return pairs;
}

SessionDescriptor read_descriptor(const std::string& path) {
    SessionDescriptor d;
    bool saw_tick = false, saw_start = false, saw_end = false;
    for (const auto& [key, value] : read_key_value_file(path)) {
        if (key == "instrument") {
            d.instrument = value;
        } else if (key == "tick_size") {
            if (!parse_f64(value, d.tick_size))
                throw TickError(ErrorCode::MalformedLine, "bad tick_size in " + path);
            saw_tick = true;
        } else if (key == "session_start_ns") {
            if (!parse_i64(value, d.session_start_ns))
                throw TickError(ErrorCode::MalformedLine, "bad session_start_ns in " + path);
            saw_start = true;
        } else if (key == "session_end_ns") {
            if (!parse_i64(value, d.session_end_ns))
                throw TickError(ErrorCode::MalformedLine, "bad session_end_ns in " + path);
            saw_end = true;
        }
        // unknown keys ignored
    }
    if (d.instrument.empty())
        throw TickError(ErrorCode::ConfigInvalid, "descriptor missing key: instrument");
    if (!saw_tick) throw TickError(ErrorCode::ConfigInvalid, "descriptor missing key: tick_size");
    if (!saw_start)
        throw TickError(ErrorCode::ConfigInvalid, "descriptor missing key: session_start_ns");
    if (!saw_end)
        throw TickError(ErrorCode::ConfigInvalid, "descriptor missing key: session_end_ns");
    d.validate();
    return d;
}

void write_descriptor(const std::string& path, const SessionDescriptor& descriptor) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw TickError(ErrorCode::IoError, "cannot write descriptor: " + path);
    std::string out;
    out += "instrument = " + descriptor.instrument + "\n";
    out += "tick_size = " + format_double(descriptor.tick_size) + "\n";
    out += "session_start_ns = " + std::to_string(descriptor.session_start_ns) + "\n";
    out += "session_end_ns = " + std::to_string(descriptor.session_end_ns) + "\n";
    std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
}

}  // namespace tickimpact
