#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sddetem/model.hpp"
#include "sddetem/solver.hpp"
#include "sddetem/truncation.hpp"

namespace sddetem {

// Deterministic pairwise (tree) summation: fixed reduction order independent of worker
// count, better rounding than a running sum on large ensembles.
double pairwise_sum(const double* data, std::size_t n);
double pairwise_sum(const std::vector<double>& data);

// Distribution summary in fixed column order (min, mean, sd, kurt, skew, max).
// Population moments: sd divides by n; kurt is Pearson (non-excess) m4/sd^4 and skew
// m3/sd^3. For constant samples sd = 0 and skew/kurt are absent (reported "NA"), never
// NaN. Fewer than 2 samples -> InsufficientSamples.
struct SummaryStats {
    double min = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    std::optional<double> kurt;
    std::optional<double> skew;
    double max = 0.0;
    std::size_t n = 0;
};
SummaryStats summary_stats(const std::vector<double>& samples);

// V(x) = x^beta - 1 - beta ln x for x > 0, beta in (0, 1); nonnegative with V(1) = 0.
// Used as a boundedness diagnostic on ensemble means.
double lyapunov_value(double x, double beta);

// Ensemble mean of V(state) at each grid time t_k, k = 0..N. Paths containing any
// non-positive state on [0, T] are excluded and counted (the explicit scheme can touch
// negatives transiently). Accumulation order is fixed by path_id.
struct LyapunovTrace {
    std::vector<double> times;
    std::vector<double> mean_v;
    std::size_t paths_used = 0;
    std::size_t paths_excluded = 0;
};

// Streaming accumulator behind lyapunov_trace, for ensembles too large to materialize.
class LyapunovAccumulator {
public:
    LyapunovAccumulator(const SolverGrid& grid, double beta);
    void add_path(const SamplePath& path);
    LyapunovTrace finalize() const;

private:
    SolverGrid grid_;
    double beta_;
    std::vector<double> sums_;
    std::size_t used_ = 0;
    std::size_t excluded_ = 0;
};

LyapunovTrace lyapunov_trace(const std::vector<SamplePath>& ensemble, double beta);

// Monte Carlo estimate of the worst interpolation gap E|x(t) - step readout(t)|^p over
// the refinement points interior to the coarse steps; the two processes coincide at
// coarse grid points so the gap there is identically zero. Noise is one fine stream per
// path, coarsened by refine_factor for the solve.
struct GapMomentResult {
    double max_moment = 0.0;  // max over interior refinement points of mean |gap|^p
    std::size_t points = 0;   // number of interior refinement points scanned
    std::size_t n_paths = 0;
};
GapMomentResult gap_moment(const TruncationPolicy& policy, const InitialSegment& init,
                           const SolverGrid& grid, std::size_t refine_factor,
                           double p_exp, std::size_t n_paths, std::uint64_t seed,
                           std::size_t workers = 1);

// Pathwise sup-distance max_k |a_k - b_k| over computed grid points k = 0..N. The paths
// must share the underlying Brownian path (same seed and path_id) and horizon; grids may
// differ only by nesting (one delta an integer multiple of the other), in which case the
// comparison runs on the coarser grid's points.
double sup_error(const SamplePath& a, const SamplePath& b);

// Convergence study: for each step size, solve on coarsenings of one shared fine stream
// per path and aggregate sup-errors. SchemePair compares TEM against BEM at the same
// step; SelfReference compares TEM at each step against a TEM reference solve at
// delta_ref (which every step size must be an integer multiple of).
enum class ComparisonMode { SchemePair, SelfReference };

struct ConvergenceRow {
    double delta = 0.0;
    double error_median = 0.0;
    double error_mean = 0.0;
    double error_p90 = 0.0;
    std::size_t n_paths = 0;
};

struct ConvergenceConfig {
    std::vector<double> deltas;  // step sizes under study, any order
    double delta_ref = 0.0;      // reference step (SelfReference); 0 = finest of deltas
    double horizon = 0.0;        // T
    double tau = 0.0;
    double xi0 = 0.0;  // constant initial value
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    ComparisonMode mode = ComparisonMode::SchemePair;
    std::size_t workers = 1;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;  // sorted by decreasing delta
    double slope = 0.0;                // log-log OLS slope of median error vs delta
    double slope_se = 0.0;
    double intercept = 0.0;
};

ConvergenceResult convergence_study(const TruncationPolicy& policy,
                                    const ConvergenceConfig& config);

// Ordinary least squares of log(y) on log(x); slope standard error from the residuals.
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Fraction of paths leaving [1/k_level, k_level] at some grid index before the horizon.
// k_level must exceed 1. Non-increasing in k_level on a fixed ensemble (nested events).
double exit_probability(const std::vector<SamplePath>& ensemble, double k_level);

// Lower p-quantile by linear interpolation of order statistics (median = quantile 0.5).
double quantile(std::vector<double> values, double p);

}  // namespace sddetem
