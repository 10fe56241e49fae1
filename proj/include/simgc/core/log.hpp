#pragma once

#include <iostream>

#include "simgc/core/error.hpp"

namespace simgc::log {

/// Progress output goes to stderr and is off unless a front end enables it.
inline bool& enabled() {
  static bool on = false;
  return on;
}

template <class... Args>
void info(const Args&... args) {
  if (enabled()) std::cerr << "[simgc] " << detail::concat(args...) << '\n';
}

}  // namespace simgc::log
