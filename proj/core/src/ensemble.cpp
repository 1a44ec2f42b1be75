#include "sddetem/ensemble.hpp"

#include <algorithm>

namespace sddetem {

std::size_t resolve_workers(std::size_t requested) {
    if (requested == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        return std::clamp<std::size_t>(hw == 0 ? 1 : hw, 1, 256);
    }
    return std::min<std::size_t>(requested, 256);
}

}  // namespace sddetem
