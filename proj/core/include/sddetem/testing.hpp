#pragma once

#include "sddetem/model.hpp"

// Test-only hatch: mint a ValidatedParams without running the admissibility checks, so
// tests can probe solver behaviour on parameter sets the public API would reject.
// Production code must never include this header.

namespace sddetem {
namespace detail {

struct UncheckedAccess {
    static ValidatedParams wrap(const ModelParams& p) { return ValidatedParams(p); }
};

}  // namespace detail

namespace testing {

inline ValidatedParams unchecked_params(const ModelParams& p) {
    return detail::UncheckedAccess::wrap(p);
}

}  // namespace testing
}  // namespace sddetem
