#pragma once

#include <cstdint>
#include <string>

#include "meshbed/net/address.hpp"

namespace meshbed {

// Message type codes. 1..9 are the bootstrap protocol's fixed codes; the
// rest are service and infrastructure traffic.
namespace msg {
inline constexpr std::uint16_t kBroadcast = 1;
inline constexpr std::uint16_t kRegDev = 2;
inline constexpr std::uint16_t kAsgnAgn = 3;
inline constexpr std::uint16_t kServReq = 4;
inline constexpr std::uint16_t kReady = 5;
inline constexpr std::uint16_t kAgnReady = 6;
inline constexpr std::uint16_t kRunServ = 7;
inline constexpr std::uint16_t kSensing = 8;
inline constexpr std::uint16_t kActuation = 9;
inline constexpr std::uint16_t kOperatorNotice = 10;
inline constexpr std::uint16_t kDeregDev = 11;

inline constexpr std::uint16_t kLog = 100;

inline constexpr std::uint16_t kChangeCommand = 201;

inline constexpr std::uint16_t kEposUp = 301;
inline constexpr std::uint16_t kEposDown = 302;

inline constexpr std::uint16_t kGossipRequest = 310;
inline constexpr std::uint16_t kGossipReply = 311;
inline constexpr std::uint16_t kDiasSession = 312;
inline constexpr std::uint16_t kDiasSessionAck = 313;
inline constexpr std::uint16_t kDiasEstimate = 314;
inline constexpr std::uint16_t kDiasLeave = 315;
} // namespace msg

inline constexpr std::size_t kMaxBodyBytes = 16ull * 1024 * 1024;

// Framed wire message. `seq` is a per-sender counter, so the values seen on
// any (sender, recipient) pair are strictly increasing.
struct Envelope {
    std::uint16_t msg_type = 0;
    NetworkAddress sender;
    NetworkAddress recipient;
    std::uint64_t seq = 0;
    std::string body;

    bool operator==(const Envelope&) const = default;
};

} // namespace meshbed
