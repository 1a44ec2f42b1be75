#include "sddetem/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sddetem/analysis.hpp"
#include "sddetem/errors.hpp"

namespace sddetem {

namespace {

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// Per-path values in canonical path_id order, with a shared-grid check.
template <typename PerPath>
std::vector<double> ordered_values(const std::vector<SamplePath>& ensemble,
                                   const PerPath& per_path) {
    if (ensemble.empty()) throw InsufficientSamples("pricing needs a nonempty ensemble");
    const SolverGrid& g0 = ensemble.front().grid;
    std::vector<const SamplePath*> order;
    order.reserve(ensemble.size());
    for (const auto& p : ensemble) {
        if (p.grid.lag_steps != g0.lag_steps || p.grid.steps != g0.steps ||
            !close_rel(p.grid.delta, g0.delta, 1e-12))
            throw std::invalid_argument("pricing ensemble paths must share one grid");
        order.push_back(&p);
    }
    std::sort(order.begin(), order.end(), [](const SamplePath* a, const SamplePath* b) {
        return a->path_id < b->path_id;
    });
    std::vector<double> values;
    values.reserve(order.size());
    for (const SamplePath* p : order) values.push_back(per_path(*p));
    return values;
}

}  // namespace

MCEstimate mc_estimate(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw InsufficientSamples("mc_estimate needs at least 2 samples");
    MCEstimate e;
    e.n = n;
    const auto bounds = std::minmax_element(samples.begin(), samples.end());
    if (*bounds.first == *bounds.second) {
        // Constant sample: the estimate is exact and the interval collapses.
        e.mean = *bounds.first;
        e.std_error = 0.0;
        e.ci95_lo = e.mean;
        e.ci95_hi = e.mean;
        return e;
    }
    const double nn = static_cast<double>(n);
    e.mean = pairwise_sum(samples) / nn;
    const double mean = e.mean;
    const auto* d = samples.data();
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = d[i] - mean;
        ss += c * c;
    }
    const double sample_var = ss / (nn - 1.0);
    e.std_error = std::sqrt(sample_var / nn);
    e.ci95_lo = e.mean - 1.96 * e.std_error;
    e.ci95_hi = e.mean + 1.96 * e.std_error;
    return e;
}

double bond_discount(const SamplePath& path) {
    const auto m = static_cast<std::ptrdiff_t>(path.grid.lag_steps);
    const double* start = path.states.data() + m;
    const double integral =
        path.grid.delta * pairwise_sum(start, path.grid.steps);
    return std::exp(-integral);
}

double lookback_payoff(const SamplePath& path, double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("strike must be positive");
    double lowest = path.state(0);
    for (std::size_t k = 1; k <= path.grid.steps; ++k)
        lowest = std::min(lowest, path.state(static_cast<std::ptrdiff_t>(k)));
    return std::max(strike - lowest, 0.0);
}

MCEstimate bond_price(const std::vector<SamplePath>& ensemble) {
    return mc_estimate(
        ordered_values(ensemble, [](const SamplePath& p) { return bond_discount(p); }));
}

MCEstimate lookback_put(const std::vector<SamplePath>& ensemble, double strike) {
    return mc_estimate(ordered_values(
        ensemble, [&](const SamplePath& p) { return lookback_payoff(p, strike); }));
}

}  // namespace sddetem
