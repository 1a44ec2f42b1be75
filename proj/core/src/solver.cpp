#include "sddetem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sddetem/errors.hpp"

namespace sddetem {

namespace {

constexpr double kStateCap = 1e12;  // overflow guard; unreachable with truncation active

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

void check_alignment(const InitialSegment& init, const SolverGrid& grid,
                     const IncrementStream& noise) {
    if (grid.lag_steps < 1 || grid.steps < 1)
        throw std::invalid_argument("solver grid needs lag_steps >= 1 and steps >= 1");
    if (init.lag_steps() != grid.lag_steps)
        throw std::invalid_argument("initial segment lag does not match the grid");
    if (!close_rel(noise.delta(), grid.delta, 1e-12))
        throw std::invalid_argument("noise step size does not match the grid");
    if (noise.count() < grid.steps)
        throw std::invalid_argument("noise stream has fewer increments than grid steps");
}

}  // namespace

SamplePath solve_tem(const TruncationPolicy& policy, const InitialSegment& init,
                     const SolverGrid& grid, const IncrementStream& noise) {
    check_alignment(init, grid, noise);
    const TruncatedCoeffs coeffs(policy, grid.delta);
    const double kappa = coeffs.kappa();
    const double delta = grid.delta;
    const std::size_t m = grid.lag_steps;

    SamplePath path;
    path.grid = grid;
    path.scheme = Scheme::TEM;
    path.seed = noise.seed();
    path.path_id = noise.path_id();
    path.states = init.values();
    path.states.reserve(m + grid.steps + 1);

    const std::vector<double>& db = noise.values();
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double x = path.states[m + k];
        const double x_lag = path.states[k];  // index (k - M) + M
        if (x < 0.0) ++path.negative_events;
        if ((x >= 0.0 && x > kappa) || (x >= 0.0 && x_lag >= 0.0 && x_lag > kappa))
            ++path.clamp_events;
        const double next =
            x + coeffs.drift(x) * delta + coeffs.diffusion(x, x_lag) * db[k];
        if (!(std::abs(next) <= kStateCap))
            throw SolverFailure("state magnitude exceeded the 1e12 overflow guard",
                                static_cast<long>(k));
        path.states.push_back(next);
    }
    return path;
}

double implicit_step_solve(const ModelParams& p, double delta, double rhs) {
    const double b = rhs + p.alpha * p.mu * delta;
    if (!(b > 0.0))
        throw ImplicitStepFailure(
            "implicit step unsolvable: rhs + alpha*mu*delta = " + std::to_string(b) +
            " is not positive");
    const double a = p.alpha * delta;
    // phi(y) = y + a*y^gamma is strictly increasing on [0, inf) with phi(0) = 0 < b and
    // phi(b) >= b, so the root lies in (0, b].
    double lo = 0.0;
    double hi = b;
    double y = std::min(std::max(rhs, 1e-12), b);
    for (int it = 0; it < 200; ++it) {
        const double residual = y + a * power(y, p.gamma) - b;
        if (residual > 0.0)
            hi = y;
        else
            lo = y;
        if (std::abs(residual) <= 1e-15 * std::max(1.0, b) && it > 0) break;
        const double slope = 1.0 + a * p.gamma * power(y, p.gamma - 1.0);
        double next = y - residual / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - y) <= 1e-16 * std::max(1.0, y)) {
            y = next;
            break;
        }
        y = next;
    }
    const double residual = y + a * power(y, p.gamma) - b;
    if (std::abs(residual) > 1e-10 * std::max(1.0, b))
        throw ImplicitStepFailure("implicit step root solve failed its residual check");
    return y;
}

SamplePath solve_bem(const ValidatedParams& p, const InitialSegment& init,
                     const SolverGrid& grid, const IncrementStream& noise) {
    check_alignment(init, grid, noise);
    const ModelParams& m = p.get();
    const double delta = grid.delta;
    const std::size_t lag = grid.lag_steps;

    SamplePath path;
    path.grid = grid;
    path.scheme = Scheme::BEM;
    path.seed = noise.seed();
    path.path_id = noise.path_id();
    path.states = init.values();
    path.states.reserve(lag + grid.steps + 1);

    const std::vector<double>& db = noise.values();
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double x = path.states[lag + k];
        const double x_lag = path.states[k];
        if (x < 0.0) ++path.negative_events;
        const double g = diffusion(m, std::max(x, 0.0), std::max(x_lag, 0.0));
        const double rhs = x + g * db[k];
        double next;
        try {
            next = implicit_step_solve(m, delta, rhs);
        } catch (const ImplicitStepFailure& e) {
            throw ImplicitStepFailure(std::string(e.what()) + " (step " +
                                          std::to_string(k) + ")",
                                      static_cast<long>(k));
        }
        if (!(std::abs(next) <= kStateCap))
            throw SolverFailure("state magnitude exceeded the 1e12 overflow guard",
                                static_cast<long>(k));
        path.states.push_back(next);
    }
    return path;
}

double step_value(const SamplePath& path, double t) {
    const auto m = static_cast<std::ptrdiff_t>(path.grid.lag_steps);
    const auto n = static_cast<std::ptrdiff_t>(path.grid.steps);
    const double delta = path.grid.delta;
    const double slack = 1e-9 * std::max(1.0, std::abs(path.grid.horizon()));
    if (t < -path.grid.tau() - slack || t > path.grid.horizon() + slack)
        throw std::out_of_range("step_value: time outside [-tau, T]");
    auto k = static_cast<std::ptrdiff_t>(std::floor(t / delta));
    // Snap against floating-point drift in t/delta.
    while (k < n && static_cast<double>(k + 1) * delta <= t) ++k;
    while (k > -m && static_cast<double>(k) * delta > t) --k;
    k = std::clamp(k, -m, n);
    return path.state(k);
}

double interpolated_value(const SamplePath& path, const TruncationPolicy& policy,
                          const IncrementStream& fine, std::size_t fine_index) {
    return interpolated_value(path, TruncatedCoeffs(policy, path.grid.delta), fine,
                              fine_index);
}

double interpolated_value(const SamplePath& path, const TruncatedCoeffs& coeffs,
                          const IncrementStream& fine, std::size_t fine_index) {
    if (path.scheme != Scheme::TEM)
        throw std::invalid_argument(
            "interpolated_value is defined for the explicit truncated scheme");
    const double ratio = path.grid.delta / fine.delta();
    const auto factor = static_cast<std::size_t>(std::llround(ratio));
    if (factor < 1 ||
        !close_rel(static_cast<double>(factor) * fine.delta(), path.grid.delta, 1e-9))
        throw std::invalid_argument("stream is not a refinement of the path grid");
    if (fine_index > fine.count() ||
        fine_index > factor * path.grid.steps)
        throw std::invalid_argument("refinement index outside the path horizon");
    const std::size_t j = fine_index / factor;
    const std::size_t rem = fine_index % factor;
    const auto jj = static_cast<std::ptrdiff_t>(j);
    if (rem == 0) return path.state(jj);
    const double xj = path.state(jj);
    const double x_lag = path.state(jj - static_cast<std::ptrdiff_t>(path.grid.lag_steps));
    const double dt = static_cast<double>(rem) * fine.delta();
    const double db = fine.nodes()[fine_index] - fine.nodes()[j * factor];
    return xj + coeffs.drift(xj) * dt + coeffs.diffusion(xj, x_lag) * db;
}

std::optional<std::size_t> first_exit_index(const SamplePath& path, double lower,
                                            double upper) {
    if (!(lower > 0.0 && lower < upper))
        throw std::invalid_argument("first_exit_index requires 0 < lower < upper");
    for (std::size_t k = 0; k <= path.grid.steps; ++k) {
        const double s = path.state(static_cast<std::ptrdiff_t>(k));
        if (s < lower || s > upper) return k;
    }
    return std::nullopt;
}

}  // namespace sddetem
