#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace sddetem {

// Map a --workers request to a concrete thread count (0 = hardware concurrency,
// clamped to [1, 256]).
std::size_t resolve_workers(std::size_t requested);

// Run produce(path_id) for path_id = 0..n-1 on `workers` threads and deliver results to
// consume(path_id, result&&) on the calling thread in strictly increasing path_id order.
// Because consumption order is fixed, any accumulation done in `consume` is bit-identical
// for every worker count. Work is issued in blocks of workers*8 paths so peak memory is
// bounded by one block of results. Exceptions from producers are rethrown (first one by
// path_id) after the in-flight block drains.
template <typename Produce, typename Consume>
void for_each_path_ordered(std::size_t n, std::size_t workers, Produce produce,
                           Consume consume) {
    using Result = decltype(produce(std::size_t{0}));
    if (n == 0) return;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) consume(i, produce(i));
        return;
    }
    const std::size_t block = workers * 8;
    std::vector<std::optional<Result>> results(block);
    std::vector<std::exception_ptr> errors(block);
    for (std::size_t begin = 0; begin < n; begin += block) {
        const std::size_t end = begin + block < n ? begin + block : n;
        const std::size_t count = end - begin;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                for (std::size_t i = w; i < count; i += workers) {
                    try {
                        results[i].emplace(produce(begin + i));
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < count; ++i) {
            if (errors[i]) std::rethrow_exception(errors[i]);
            consume(begin + i, std::move(*results[i]));
            results[i].reset();
            errors[i] = nullptr;
        }
    }
}

}  // namespace sddetem
