#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sddetem {

// Inverse of the standard normal CDF (Wichura's PPND16 rational approximations),
// relative error below 1e-15 across (0, 1). Used instead of the standard library's
// normal_distribution because the latter's algorithm is implementation-defined, which
// would break the bit-reproducibility contract.
double inverse_normal_cdf(double p);

// Brownian increments of one path on a uniform grid, keyed by (seed, path_id) so any
// worker can regenerate any path independently and bit-identically. The stream stores
// both the increments and the Brownian nodes B(t_k) (left-to-right prefix sums fixed at
// generation), so coarsening can subsample nodes: coarse and fine streams are then exact
// restrictions of one Brownian path, and coarsening composes exactly.
class IncrementStream {
public:
    std::uint64_t seed() const { return seed_; }
    std::uint64_t path_id() const { return path_id_; }
    double delta() const { return delta_; }
    std::size_t count() const { return values_.size(); }

    // Increment k = B(t_{k+1}) - B(t_k), each Normal(0, delta); length = count.
    const std::vector<double>& values() const { return values_; }

    // Brownian nodes B(t_k), k = 0..count; nodes[0] = 0. Length = count + 1.
    const std::vector<double>& nodes() const { return nodes_; }

private:
    friend IncrementStream generate(std::uint64_t seed, std::uint64_t path_id,
                                    double delta, std::size_t count);
    friend IncrementStream coarsen(const IncrementStream& fine, std::size_t factor);

    IncrementStream() = default;

    std::uint64_t seed_ = 0;
    std::uint64_t path_id_ = 0;
    double delta_ = 0.0;
    std::vector<double> values_;
    std::vector<double> nodes_;
};

// Generate `count` Normal(0, delta) increments for path `path_id` under master `seed`.
// Same key -> identical bits, across runs and worker counts. count = 0 is rejected.
IncrementStream generate(std::uint64_t seed, std::uint64_t path_id, double delta,
                         std::size_t count);

// Restrict the stream to every `factor`-th node: output increment j spans fine
// increments [j*factor, (j+1)*factor), output delta = fine.delta * factor. The factor
// must divide fine.count. Node subsampling makes composition and cumulative-sum
// consistency exact (no re-summation).
IncrementStream coarsen(const IncrementStream& fine, std::size_t factor);

}  // namespace sddetem
