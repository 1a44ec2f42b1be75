#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sddetem/model.hpp"
#include "sddetem/noise.hpp"
#include "sddetem/truncation.hpp"

namespace sddetem {

// Uniform grid with the delay an exact multiple of the step: delta = tau / lag_steps,
// horizon = steps * delta. Exactness of tau and T as multiples of delta is enforced
// upstream (the CLI parses steps as exact decimals); here the grid is just counts.
struct SolverGrid {
    double delta = 0.0;
    std::size_t lag_steps = 0;  // M: delay expressed in steps
    std::size_t steps = 0;      // N: horizon expressed in steps

    double tau() const { return delta * static_cast<double>(lag_steps); }
    double horizon() const { return delta * static_cast<double>(steps); }
    double time(std::ptrdiff_t k) const { return static_cast<double>(k) * delta; }
};

enum class Scheme { TEM, BEM };

// One solved trajectory: initial segment followed by computed states, indexed
// k = -M..N (storage offset M). clamp_events counts steps whose coefficient arguments
// hit the clamp level; negative_events counts steps entered from a negative state.
struct SamplePath {
    SolverGrid grid;
    Scheme scheme = Scheme::TEM;
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    std::vector<double> states;  // length M + N + 1
    std::size_t clamp_events = 0;
    std::size_t negative_events = 0;

    double state(std::ptrdiff_t k) const {
        return states[static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(grid.lag_steps))];
    }
};

// Explicit truncated Euler-Maruyama recursion
//     X_{k+1} = X_k + f_delta(X_k) delta + g_delta(X_k, X_{k-M}) dB_k.
// The initial segment must have lag_steps = grid.lag_steps and the noise must carry at
// least grid.steps increments at grid.delta. Model parameters come from the policy.
SamplePath solve_tem(const TruncationPolicy& policy, const InitialSegment& init,
                     const SolverGrid& grid, const IncrementStream& noise);

// Unique positive root of y + alpha delta y^gamma = rhs + alpha mu delta (the left side
// is strictly increasing from 0 to infinity). Newton from max(rhs, eps) with a bisection
// safeguard; relative tolerance 1e-12. rhs + alpha mu delta <= 0 -> ImplicitStepFailure.
double implicit_step_solve(const ModelParams& p, double delta, double rhs);

// Drift-implicit, diffusion-explicit comparator:
//     X_{k+1} + alpha delta X_{k+1}^gamma = X_k + alpha mu delta + g(X_k^+, X_{k-M}^+) dB_k,
// negative diffusion arguments clipped to 0. Root failures propagate with the step index.
SamplePath solve_bem(const ValidatedParams& p, const InitialSegment& init,
                     const SolverGrid& grid, const IncrementStream& noise);

// Piecewise-constant readout: X_{floor(t/delta)} for t in [-tau, T]; X_N at t = T.
double step_value(const SamplePath& path, double t);

// Continuous-time interpolation evaluated at node `fine_index` of a refinement stream
// whose nodes subsample to the path's own noise: within coarse step [t_j, t_{j+1}),
//     x(t) = X_j + f_delta(X_j) (t - t_j) + g_delta(X_j, X_{j-M}) (B(t) - B(t_j)),
// with B read from `fine`. At coarse grid points the stored state is returned verbatim
// (bitwise). The policy must be the one the path was solved under.
double interpolated_value(const SamplePath& path, const TruncationPolicy& policy,
                          const IncrementStream& fine, std::size_t fine_index);

// Same, with the truncated coefficients precomputed (hot loops: no cache lookups).
double interpolated_value(const SamplePath& path, const TruncatedCoeffs& coeffs,
                          const IncrementStream& fine, std::size_t fine_index);

// Smallest k >= 0 with states[k] outside [lower, upper]; nullopt if the path stays in.
std::optional<std::size_t> first_exit_index(const SamplePath& path, double lower,
                                            double upper);

}  // namespace sddetem
