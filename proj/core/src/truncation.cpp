#include "sddetem/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "sddetem/errors.hpp"

namespace sddetem {

namespace {

std::string format_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double envelope_derivative(const Envelope& z, double u) {
    double d = 0.0;
    for (const auto& t : z.terms) {
        if (t.exponent == 0.0) continue;
        d += t.coeff * t.exponent * power(u, t.exponent - 1.0);
    }
    return d;
}

}  // namespace

double Envelope::value(double u) const {
    double v = 0.0;
    for (const auto& t : terms) v += t.coeff * power(u, t.exponent);
    return v;
}

Envelope default_envelope(const ValidatedParams& p) {
    Envelope z;
    z.name = "default";
    z.u_min = 0.0;
    z.terms.push_back({p->alpha * p->mu, 0.0});
    z.terms.push_back({p->alpha, p->gamma});
    if (p->sigma > 0.0) z.terms.push_back({p->sigma, p->theta + p->r});
    return z;
}

Envelope example_envelope() {
    Envelope z;
    z.name = "paper_example";
    z.u_min = 1.0;
    z.terms.push_back({6.5, 2.0});
    return z;
}

double envelope_inverse(const Envelope& z, double v) {
    const double floor_v = z.value(z.u_min);
    if (!(v >= floor_v))
        throw std::domain_error("envelope inverse undefined below z(u_min) = " +
                                format_num(floor_v));
    const double tol = 1e-12 * std::max(1.0, v);
    double lo = z.u_min;
    if (std::abs(z.value(lo) - v) <= tol) return lo;
    double hi = std::max(1.0, 2.0 * lo);
    while (z.value(hi) < v) {
        hi *= 2.0;
        if (hi > 1e300)
            throw std::domain_error("envelope inverse bracket exceeded 1e300");
    }
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fu = z.value(u) - v;
        if (std::abs(fu) <= tol) return u;
        if (fu > 0.0)
            hi = u;
        else
            lo = u;
        const double du = envelope_derivative(z, u);
        double next = du > 0.0 ? u - fu / du : u;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        u = next;
    }
    return u;
}

double TruncationPolicy::psi(double delta) const {
    if (!(delta > 0.0)) throw std::domain_error("psi requires delta > 0");
    return psi_scale_ * std::pow(delta, -psi_exponent_);
}

double TruncationPolicy::effective_psi(double delta) const {
    const double floor_psi = envelope_.value(std::max(1.0, envelope_.u_min));
    return std::max(psi(delta), floor_psi);
}

TruncationPolicy make_policy(const ValidatedParams& p,
                             const PolicyOverrides& overrides) {
    TruncationPolicy policy;
    policy.params_ = p.get();
    policy.envelope_ = overrides.envelope ? *overrides.envelope : default_envelope(p);
    policy.psi_scale_ = overrides.psi_scale.value_or(1.0);
    policy.psi_exponent_ = overrides.psi_exponent.value_or(0.25);
    policy.strict_42_ = overrides.strict_42;
    policy.cache_ = std::make_shared<TruncationPolicy::ClampCache>();

    // Hard type invariants, independent of mode.
    if (!(policy.psi_scale_ >= 1.0))
        throw PolicyViolation("psi_scale must be >= 1");
    if (!(policy.psi_exponent_ > 0.0))
        throw PolicyViolation("psi_exponent must be > 0");

    const double z1 = policy.envelope_.value(std::max(1.0, policy.envelope_.u_min));
    if (overrides.delta_star) {
        policy.delta_star_ = *overrides.delta_star;
    } else {
        // Largest step with psi(delta) >= z(1): delta_star = (psi0 / z(1))^(1/q), capped
        // at 1.
        policy.delta_star_ =
            std::min(1.0, std::pow(policy.psi_scale_ / z1, 1.0 / policy.psi_exponent_));
    }
    if (!(policy.delta_star_ > 0.0 && policy.delta_star_ <= 1.0))
        throw PolicyViolation("delta_star must lie in (0, 1]");

    auto flag = [&policy](const std::string& msg) {
        if (policy.strict_42_) throw PolicyViolation(msg);
        policy.warnings_.push_back(msg);
    };

    // Admissibility of the step bound on (0, delta_star].
    const double psi_at_star = policy.psi(policy.delta_star_);
    if (!(psi_at_star >= z1 * (1.0 - 1e-12)))
        flag("violates psi(delta_star) >= z(1): psi(" +
             format_num(policy.delta_star_) + ") = " + format_num(psi_at_star) +
             " < " + format_num(z1));
    const double quarter_margin =
        policy.psi_scale_ * std::pow(policy.delta_star_, 0.25 - policy.psi_exponent_);
    if (policy.psi_exponent_ > 0.25 || quarter_margin > 1.0 + 1e-12)
        flag("violates delta^(1/4)*psi(delta) <= 1 on (0, delta_star]: requires q <= "
             "1/4 and psi0*delta_star^(1/4-q) <= 1 (q = " +
             format_num(policy.psi_exponent_) + ", margin = " +
             format_num(quarter_margin) + ")");

    // Majorant spot check: deterministic random sampling of
    // sup_{0 <= x, y <= u} (|f(x)| v g(x, y)) <= z(u) over u >= u_min.
    {
        std::mt19937_64 rng(0x5eed5eed5eed5eedULL);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const ModelParams& m = policy.params_;
        double worst_u = -1.0, worst_excess = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const double u = policy.envelope_.u_min + 20.0 * unit(rng);
            const double x = u * unit(rng);
            const double y = u * unit(rng);
            const double cap = std::max(std::abs(drift(m, x)), diffusion(m, x, y));
            const double zu = policy.envelope_.value(u);
            if (cap > zu * (1.0 + 1e-9)) {
                const double excess = cap - zu;
                if (excess > worst_excess) {
                    worst_excess = excess;
                    worst_u = u;
                }
            }
        }
        if (worst_u >= 0.0)
            flag("envelope fails the coefficient majorant spot check near u = " +
                 format_num(worst_u) + " (exceeds z(u) by " + format_num(worst_excess) +
                 ")");
    }

    policy.provenance_ = "envelope=" + policy.envelope_.name +
                         " (u_min=" + format_num(policy.envelope_.u_min) +
                         "); psi(delta)=" + format_num(policy.psi_scale_) +
                         "*delta^-" + format_num(policy.psi_exponent_) +
                         "; delta_star=" + format_num(policy.delta_star_) +
                         "; mode=" + (policy.strict_42_ ? "strict" : "warn");
    return policy;
}

double clamp_bound(const TruncationPolicy& policy, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("clamp_bound requires delta > 0");
    if (policy.strict_42() && delta > policy.delta_star() * (1.0 + 1e-12))
        throw PolicyViolation("step size " + format_num(delta) +
                              " exceeds delta_star = " +
                              format_num(policy.delta_star()) +
                              " under a strict policy");
    auto& cache = *policy.cache_;
    {
        std::lock_guard<std::mutex> lock(cache.mutex);
        auto it = cache.values.find(delta);
        if (it != cache.values.end()) return it->second;
    }
    const double kappa = envelope_inverse(policy.envelope(), policy.effective_psi(delta));
    std::lock_guard<std::mutex> lock(cache.mutex);
    cache.values.emplace(delta, kappa);
    return kappa;
}

TruncatedCoeffs::TruncatedCoeffs(const TruncationPolicy& policy, double delta)
    : p_(policy.params()), kappa_(clamp_bound(policy, delta)) {}

double TruncatedCoeffs::drift(double x) const {
    if (x < 0.0) return p_.alpha * p_.mu;
    return sddetem::drift(p_, std::min(x, kappa_));
}

double TruncatedCoeffs::diffusion(double x, double y) const {
    if (x < 0.0 || y < 0.0) return 0.0;
    return sddetem::diffusion(p_, std::min(x, kappa_), std::min(y, kappa_));
}

double truncated_drift(const TruncationPolicy& policy, double delta, double x) {
    return TruncatedCoeffs(policy, delta).drift(x);
}

double truncated_diffusion(const TruncationPolicy& policy, double delta, double x,
                           double y) {
    return TruncatedCoeffs(policy, delta).diffusion(x, y);
}

}  // namespace sddetem
