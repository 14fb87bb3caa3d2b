#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "meshbed/net/envelope.hpp"

namespace meshbed {

struct FrameError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Frame layout: 4-byte big-endian payload length, then the payload:
//   2B msg_type | 8B seq | 2B sender length + sender | 2B recipient length +
//   recipient | body. All integers big-endian, addresses UTF-8 strings.
std::string encode_frame(const Envelope& env);

// Decodes one complete frame from the front of `bytes`. Throws FrameError
// with "incomplete frame" when bytes end mid-frame.
Envelope decode_frame(std::string_view bytes);

// Incremental decoder for stream transports.
class FrameDecoder {
public:
    void feed(std::string_view bytes) { buffer_.append(bytes); }

    // Returns the next complete envelope, or nullopt if more bytes are
    // needed. Throws FrameError on malformed frames.
    std::optional<Envelope> next();

    std::size_t buffered() const { return buffer_.size(); }

private:
    std::string buffer_;
};

} // namespace meshbed
