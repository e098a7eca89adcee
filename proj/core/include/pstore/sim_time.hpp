// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>

namespace pstore {

// Simulated clock: microseconds since the start of a simulation run.
struct SimClock {
  using rep = std::int64_t;
  using period = std::micro;
  using duration = std::chrono::duration<rep, period>;
  using time_point = std::chrono::time_point<SimClock>;
  static constexpr bool is_steady = true;
};

using SimDuration = SimClock::duration;
using SimTime = SimClock::time_point;

inline std::int64_t to_micros(SimTime t) { return t.time_since_epoch().count(); }
inline SimTime from_micros(std::int64_t us) { return SimTime(SimDuration(us)); }

}  // namespace pstore
