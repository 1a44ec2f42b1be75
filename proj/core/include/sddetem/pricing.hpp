#pragma once

#include <cstddef>
#include <vector>

#include "sddetem/solver.hpp"

namespace sddetem {

// Monte Carlo point estimate with a symmetric normal 95% interval:
// std_error = sample sd (divide by n-1) / sqrt(n), half-width = 1.96 * std_error.
struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
    std::size_t n = 0;
};

// Estimate from raw samples; fewer than 2 samples -> InsufficientSamples.
MCEstimate mc_estimate(const std::vector<double>& samples);

// Per-path discount exp(-delta * sum_{k=0}^{N-1} X_k): the exact integral of the
// piecewise-constant readout of the path over [0, T].
double bond_discount(const SamplePath& path);

// Per-path payoff (K - min_{0<=k<=N} X_k)^+; the min over grid values is the inf of the
// step readout over the closed interval [0, T] (right endpoint included).
double lookback_payoff(const SamplePath& path, double strike);

// Ensemble estimators. Reduction order is keyed by path_id (stable under reordering of
// the input). All paths must share one grid; empty ensembles are rejected.
MCEstimate bond_price(const std::vector<SamplePath>& ensemble);
MCEstimate lookback_put(const std::vector<SamplePath>& ensemble, double strike);

}  // namespace sddetem
