#include "sddetem/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sddetem/errors.hpp"

namespace sddetem {

namespace {

bool finite(double v) { return std::isfinite(v); }

[[noreturn]] void fail(const std::string& what) { throw AssumptionViolation(what); }

}  // namespace

double power(double x, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    if (e == 3.0) return x * x * x;
    return std::pow(x, e);
}

ValidatedParams validate_params(const ModelParams& p) {
    if (!(finite(p.alpha) && finite(p.mu) && finite(p.sigma) && finite(p.gamma) &&
          finite(p.r) && finite(p.theta) && finite(p.tau)))
        fail("model parameters must be finite");
    if (!(p.alpha > 0.0)) fail("requires alpha > 0");
    if (!(p.mu > 0.0)) fail("requires mu > 0");
    if (!(p.sigma >= 0.0)) fail("requires sigma >= 0");
    if (!(p.tau > 0.0)) fail("requires tau > 0");
    if (!(p.gamma > 1.0)) fail("requires gamma > 1");
    if (!(p.r > 0.0)) fail("requires r > 0");
    if (!(p.theta > 0.0)) fail("requires theta > 0");
    if (!(1.0 + p.gamma > 2.0 * (p.r + p.theta)))
        fail("requires 1 + gamma > 2 (r + theta)");
    return ValidatedParams(p);
}

double drift(const ModelParams& p, double x) {
    if (x < 0.0) throw std::domain_error("drift: negative state");
    return p.alpha * (p.mu - power(x, p.gamma));
}

double diffusion(const ModelParams& p, double x, double y) {
    if (x < 0.0 || y < 0.0) throw std::domain_error("diffusion: negative state");
    return p.sigma * power(x, p.theta) * power(y, p.r);
}

InitialSegment::InitialSegment(std::vector<double> grid_values, double tau,
                               double holder_d, double holder_ell)
    : values_(std::move(grid_values)), tau_(tau), holder_d_(holder_d),
      holder_ell_(holder_ell) {
    if (values_.size() < 2) fail("initial segment needs at least 2 grid values");
    if (!(tau_ > 0.0)) fail("requires tau > 0");
    if (!(holder_d_ >= 0.0)) fail("requires Holder constant D >= 0");
    if (!(holder_ell_ > 0.0 && holder_ell_ <= 1.0))
        fail("requires Holder exponent in (0, 1]");
    for (double v : values_) {
        if (!(v > 0.0) || !finite(v)) fail("initial segment values must be positive");
    }
    if (holder_d_ == 0.0) {
        for (double v : values_) {
            if (v != values_.front())
                fail("initial segment with D = 0 must be constant");
        }
    } else if (!verify_holder(values_, tau_, holder_d_, holder_ell_)) {
        fail("initial segment violates its Holder certificate");
    }
}

double InitialSegment::value(std::ptrdiff_t k) const {
    const auto m = static_cast<std::ptrdiff_t>(values_.size()) - 1;
    if (k < -m || k > 0)
        throw std::out_of_range("initial segment index outside [-M, 0]");
    return values_[static_cast<std::size_t>(k + m)];
}

InitialSegment constant_initial(double c, double tau, std::size_t lag_steps) {
    if (lag_steps < 1) fail("lag_steps must be >= 1");
    return InitialSegment(std::vector<double>(lag_steps + 1, c), tau, 0.0, 1.0);
}

bool verify_holder(const std::vector<double>& values, double tau, double holder_d,
                   double holder_ell) {
    const std::size_t n = values.size();
    if (n < 2) return true;
    const double dt = tau / static_cast<double>(n - 1);
    // bound[s] = D * (s*dt)^ell with a tiny slack so pairs equal up to rounding pass.
    std::vector<double> bound(n);
    for (std::size_t s = 1; s < n; ++s) {
        bound[s] = holder_d * std::pow(static_cast<double>(s) * dt, holder_ell);
        bound[s] = bound[s] * (1.0 + 1e-12) + 1e-15;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(values[i] - values[j]) > bound[j - i]) return false;
        }
    }
    return true;
}

}  // namespace sddetem
