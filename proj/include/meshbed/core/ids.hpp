#pragma once

#include <cstdint>

namespace meshbed {

using PeerId = std::uint64_t;
using TimerId = std::uint64_t;

// Virtual (SIM) or wall-clock (LIVE) milliseconds since runtime start.
using TimeMs = std::int64_t;

enum class ExecutionMode { Sim, Live };

enum class PeerState { Init, Running, Leaving, Stopped };

} // namespace meshbed
