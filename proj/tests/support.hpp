#pragma once

#include <optional>

#include "phaseless/error.hpp"

namespace test_support {

// Kind of the phaseless::Error thrown by f, or nullopt if none.
template <class F>
std::optional<phaseless::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const phaseless::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace test_support
