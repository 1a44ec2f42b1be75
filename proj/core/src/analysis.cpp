#include "sddetem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sddetem/ensemble.hpp"
#include "sddetem/errors.hpp"
#include "sddetem/noise.hpp"

namespace sddetem {

namespace {

// Fixed-shape pairwise reduction over f(lo..hi); the tree depends only on the index
// range, so sums are bit-identical regardless of how the inputs were produced.
template <typename F>
double pairwise_reduce(std::size_t lo, std::size_t hi, const F& f) {
    const std::size_t n = hi - lo;
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_reduce(lo, mid, f) + pairwise_reduce(mid, hi, f);
}

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

bool same_grid(const SolverGrid& a, const SolverGrid& b) {
    return a.lag_steps == b.lag_steps && a.steps == b.steps &&
           close_rel(a.delta, b.delta, 1e-12);
}

// Paths sorted by path_id give reductions a canonical order.
std::vector<const SamplePath*> by_path_id(const std::vector<SamplePath>& ensemble) {
    std::vector<const SamplePath*> out;
    out.reserve(ensemble.size());
    for (const auto& p : ensemble) out.push_back(&p);
    std::sort(out.begin(), out.end(), [](const SamplePath* a, const SamplePath* b) {
        return a->path_id < b->path_id;
    });
    return out;
}

}  // namespace

double pairwise_sum(const double* data, std::size_t n) {
    return pairwise_reduce(0, n, [data](std::size_t i) { return data[i]; });
}

double pairwise_sum(const std::vector<double>& data) {
    return pairwise_sum(data.data(), data.size());
}

SummaryStats summary_stats(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw InsufficientSamples("summary_stats needs at least 2 samples");
    SummaryStats s;
    s.n = n;
    s.min = *std::min_element(samples.begin(), samples.end());
    s.max = *std::max_element(samples.begin(), samples.end());
    if (s.min == s.max) {
        // Constant sample: report it exactly instead of through the rounded mean,
        // whose accumulation noise would otherwise produce a spurious tiny sd.
        s.mean = s.min;
        s.sd = 0.0;
        return s;
    }
    const double nn = static_cast<double>(n);
    s.mean = pairwise_sum(samples) / nn;
    const double mean = s.mean;
    const auto* d = samples.data();
    const double m2 = pairwise_reduce(0, n, [d, mean](std::size_t i) {
                          const double c = d[i] - mean;
                          return c * c;
                      }) / nn;
    s.sd = std::sqrt(m2);
    if (s.sd > 0.0) {
        const double m3 = pairwise_reduce(0, n, [d, mean](std::size_t i) {
                              const double c = d[i] - mean;
                              return c * c * c;
                          }) / nn;
        const double m4 = pairwise_reduce(0, n, [d, mean](std::size_t i) {
                              const double c = d[i] - mean;
                              const double c2 = c * c;
                              return c2 * c2;
                          }) / nn;
        s.skew = m3 / (m2 * s.sd);
        s.kurt = m4 / (m2 * m2);
    }
    return s;
}

double lyapunov_value(double x, double beta) {
    if (!(x > 0.0)) throw std::domain_error("lyapunov_value requires x > 0");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::domain_error("lyapunov_value requires beta in (0, 1)");
    return power(x, beta) - 1.0 - beta * std::log(x);
}

LyapunovAccumulator::LyapunovAccumulator(const SolverGrid& grid, double beta)
    : grid_(grid), beta_(beta), sums_(grid.steps + 1, 0.0) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::domain_error("lyapunov trace requires beta in (0, 1)");
}

void LyapunovAccumulator::add_path(const SamplePath& path) {
    if (!same_grid(path.grid, grid_))
        throw std::invalid_argument("lyapunov trace: path grid mismatch");
    for (std::size_t k = 0; k <= grid_.steps; ++k) {
        if (!(path.state(static_cast<std::ptrdiff_t>(k)) > 0.0)) {
            ++excluded_;
            return;
        }
    }
    for (std::size_t k = 0; k <= grid_.steps; ++k)
        sums_[k] += lyapunov_value(path.state(static_cast<std::ptrdiff_t>(k)), beta_);
    ++used_;
}

LyapunovTrace LyapunovAccumulator::finalize() const {
    LyapunovTrace t;
    t.paths_used = used_;
    t.paths_excluded = excluded_;
    t.times.resize(grid_.steps + 1);
    t.mean_v.resize(grid_.steps + 1);
    for (std::size_t k = 0; k <= grid_.steps; ++k) {
        t.times[k] = grid_.time(static_cast<std::ptrdiff_t>(k));
        t.mean_v[k] = used_ > 0 ? sums_[k] / static_cast<double>(used_) : 0.0;
    }
    return t;
}

LyapunovTrace lyapunov_trace(const std::vector<SamplePath>& ensemble, double beta) {
    if (ensemble.empty())
        throw std::invalid_argument("lyapunov_trace: empty ensemble");
    LyapunovAccumulator acc(ensemble.front().grid, beta);
    for (const SamplePath* p : by_path_id(ensemble)) acc.add_path(*p);
    return acc.finalize();
}

GapMomentResult gap_moment(const TruncationPolicy& policy, const InitialSegment& init,
                           const SolverGrid& grid, std::size_t refine_factor,
                           double p_exp, std::size_t n_paths, std::uint64_t seed,
                           std::size_t workers) {
    if (refine_factor < 2)
        throw std::invalid_argument("gap_moment requires refine_factor >= 2");
    if (!(p_exp >= 2.0)) throw std::invalid_argument("gap_moment requires p_exp >= 2");
    if (n_paths < 1) throw std::invalid_argument("gap_moment requires paths >= 1");
    const std::size_t interior = refine_factor - 1;
    const std::size_t n_points = grid.steps * interior;
    std::vector<double> sums(n_points, 0.0);
    const double fine_delta = grid.delta / static_cast<double>(refine_factor);

    auto produce = [&](std::size_t pid) {
        const IncrementStream fine =
            generate(seed, pid, fine_delta, grid.steps * refine_factor);
        const IncrementStream coarse = coarsen(fine, refine_factor);
        SolverGrid g = grid;
        g.delta = coarse.delta();  // bit-consistent with the coarsened stream
        const SamplePath path = solve_tem(policy, init, g, coarse);
        const TruncatedCoeffs coeffs(policy, g.delta);
        std::vector<double> powers(n_points);
        std::size_t idx = 0;
        for (std::size_t j = 0; j < g.steps; ++j) {
            const double step_readout = path.state(static_cast<std::ptrdiff_t>(j));
            for (std::size_t rho = 1; rho < refine_factor; ++rho) {
                const double x =
                    interpolated_value(path, coeffs, fine, j * refine_factor + rho);
                powers[idx++] = std::pow(std::abs(x - step_readout), p_exp);
            }
        }
        return powers;
    };
    auto consume = [&](std::size_t, std::vector<double>&& powers) {
        for (std::size_t i = 0; i < n_points; ++i) sums[i] += powers[i];
    };
    for_each_path_ordered(n_paths, workers, produce, consume);

    GapMomentResult result;
    result.points = n_points;
    result.n_paths = n_paths;
    for (double s : sums)
        result.max_moment = std::max(result.max_moment, s / static_cast<double>(n_paths));
    return result;
}

double sup_error(const SamplePath& a, const SamplePath& b) {
    if (a.seed != b.seed || a.path_id != b.path_id)
        throw std::invalid_argument("sup_error: paths do not share a Brownian path");
    if (!close_rel(a.grid.horizon(), b.grid.horizon(), 1e-9) ||
        !close_rel(a.grid.tau(), b.grid.tau(), 1e-9))
        throw std::invalid_argument("sup_error: horizons differ");
    const SamplePath& coarse = a.grid.delta >= b.grid.delta ? a : b;
    const SamplePath& fine = a.grid.delta >= b.grid.delta ? b : a;
    const double ratio = coarse.grid.delta / fine.grid.delta;
    const auto factor = static_cast<std::size_t>(std::llround(ratio));
    if (factor < 1 ||
        !close_rel(static_cast<double>(factor) * fine.grid.delta, coarse.grid.delta,
                   1e-9))
        throw std::invalid_argument("sup_error: grids are not nested");
    double worst = 0.0;
    for (std::size_t k = 0; k <= coarse.grid.steps; ++k) {
        const double d = std::abs(coarse.state(static_cast<std::ptrdiff_t>(k)) -
                                  fine.state(static_cast<std::ptrdiff_t>(k * factor)));
        worst = std::max(worst, d);
    }
    return worst;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2)
        throw std::invalid_argument("fit_loglog needs matching inputs of size >= 2");
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0))
            throw std::invalid_argument("fit_loglog requires positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    const double mx = pairwise_sum(lx) / static_cast<double>(n);
    const double my = pairwise_sum(ly) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
            ss_res += r * r;
        }
        fit.slope_se = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

ConvergenceResult convergence_study(const TruncationPolicy& policy,
                                    const ConvergenceConfig& config) {
    if (config.deltas.empty())
        throw ConfigError("convergence study needs at least one step size");
    if (config.n_paths < 1) throw ConfigError("convergence study needs paths >= 1");
    if (!(config.horizon > 0.0 && config.tau > 0.0 && config.xi0 > 0.0))
        throw ConfigError("convergence study needs positive horizon, tau and xi0");

    std::vector<double> deltas = config.deltas;
    std::sort(deltas.begin(), deltas.end(), std::greater<double>());
    const double finest = deltas.back();
    const bool self_ref = config.mode == ComparisonMode::SelfReference;
    const double base =
        self_ref && config.delta_ref > 0.0 ? config.delta_ref : finest;

    // Every step size must be an integer multiple of the base (shared-noise coupling),
    // and tau and T integer multiples of every step size.
    std::vector<std::size_t> factors(deltas.size());
    std::vector<SolverGrid> grids(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double ratio = deltas[i] / base;
        const auto f = static_cast<std::size_t>(std::llround(ratio));
        if (f < 1 || !close_rel(static_cast<double>(f) * base, deltas[i], 1e-9))
            throw ConfigError("step sizes must be nested");
        factors[i] = f;
        const auto m = static_cast<std::size_t>(std::llround(config.tau / deltas[i]));
        const auto n_steps =
            static_cast<std::size_t>(std::llround(config.horizon / deltas[i]));
        if (m < 1 || !close_rel(static_cast<double>(m) * deltas[i], config.tau, 1e-9))
            throw ConfigError("tau must be an integer multiple of every step size");
        if (n_steps < 1 ||
            !close_rel(static_cast<double>(n_steps) * deltas[i], config.horizon, 1e-9))
            throw ConfigError("T must be an integer multiple of every step size");
        grids[i] = SolverGrid{deltas[i], m, n_steps};
    }
    SolverGrid base_grid;
    if (self_ref) {
        const auto m = static_cast<std::size_t>(std::llround(config.tau / base));
        const auto n_steps =
            static_cast<std::size_t>(std::llround(config.horizon / base));
        if (!close_rel(static_cast<double>(m) * base, config.tau, 1e-9) ||
            !close_rel(static_cast<double>(n_steps) * base, config.horizon, 1e-9))
            throw ConfigError(
                "reference step must divide tau and T an integer number of times");
        base_grid = SolverGrid{base, m, n_steps};
    }
    const std::size_t base_count =
        self_ref ? base_grid.steps
                 : grids.back().steps * factors.back();

    // Initial segments per step size (constant extension of xi0 over [-tau, 0]).
    std::vector<InitialSegment> inits;
    inits.reserve(deltas.size());
    for (const auto& g : grids)
        inits.push_back(constant_initial(config.xi0, config.tau, g.lag_steps));
    const ValidatedParams params = validate_params(policy.params());
    const InitialSegment base_init =
        self_ref ? constant_initial(config.xi0, config.tau, base_grid.lag_steps)
                 : inits.front();

    std::vector<std::vector<double>> errors(deltas.size());
    for (auto& e : errors) e.reserve(config.n_paths);

    auto produce = [&](std::size_t pid) {
        const IncrementStream fine_stream = generate(config.seed, pid, base, base_count);
        std::vector<double> errs(deltas.size());
        SamplePath reference;
        if (self_ref)
            reference = solve_tem(policy, base_init, base_grid, fine_stream);
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            const IncrementStream stream = coarsen(fine_stream, factors[i]);
            SolverGrid g = grids[i];
            g.delta = stream.delta();
            const InitialSegment& init = inits[i];
            const SamplePath tem = solve_tem(policy, init, g, stream);
            if (self_ref) {
                errs[i] = sup_error(tem, reference);
            } else {
                const SamplePath bem = solve_bem(params, init, g, stream);
                errs[i] = sup_error(tem, bem);
            }
        }
        return errs;
    };
    auto consume = [&](std::size_t, std::vector<double>&& errs) {
        for (std::size_t i = 0; i < deltas.size(); ++i) errors[i].push_back(errs[i]);
    };
    for_each_path_ordered(config.n_paths, config.workers, produce, consume);

    ConvergenceResult result;
    std::vector<double> medians_pos, deltas_pos;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        ConvergenceRow row;
        row.delta = deltas[i];
        row.error_median = quantile(errors[i], 0.5);
        row.error_mean = pairwise_sum(errors[i]) / static_cast<double>(errors[i].size());
        row.error_p90 = quantile(errors[i], 0.9);
        row.n_paths = errors[i].size();
        result.rows.push_back(row);
        if (row.error_median > 0.0) {
            deltas_pos.push_back(row.delta);
            medians_pos.push_back(row.error_median);
        }
    }
    if (deltas_pos.size() >= 2) {
        const LogLogFit fit = fit_loglog(deltas_pos, medians_pos);
        result.slope = fit.slope;
        result.slope_se = fit.slope_se;
        result.intercept = fit.intercept;
    } else {
        result.slope = std::numeric_limits<double>::quiet_NaN();
        result.slope_se = std::numeric_limits<double>::quiet_NaN();
        result.intercept = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

double exit_probability(const std::vector<SamplePath>& ensemble, double k_level) {
    if (!(k_level > 1.0))
        throw std::invalid_argument("exit_probability requires k_level > 1");
    if (ensemble.empty())
        throw std::invalid_argument("exit_probability: empty ensemble");
    std::size_t exits = 0;
    for (const auto& path : ensemble) {
        if (first_exit_index(path, 1.0 / k_level, k_level).has_value()) ++exits;
    }
    return static_cast<double>(exits) / static_cast<double>(ensemble.size());
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace sddetem
