#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sddetem/model.hpp"

namespace sddetem {

// One additive term c * u^e of an envelope function.
struct EnvelopeTerm {
    double coeff;
    double exponent;
};

// Strictly increasing, unbounded majorant z of the raw coefficients:
//     sup_{0 <= x, y <= u} (|f(x)| v g(x, y)) <= z(u)   for all u >= u_min.
// Represented as a sum of power terms so both the model-derived default and the quadratic
// worked-example envelope fit one evaluation path.
struct Envelope {
    std::vector<EnvelopeTerm> terms;
    double u_min = 0.0;  // validity threshold of the majorant property
    std::string name;    // "default" | "paper_example" (CLI tokens)

    double value(double u) const;
};

// z(u) = alpha*mu + alpha*u^gamma + sigma*u^(theta+r); majorizes on all of [0, inf).
Envelope default_envelope(const ValidatedParams& p);

// z(u) = 6.5 u^2, majorant only for u >= 1 (worked-example override; u_min = 1).
Envelope example_envelope();

// Solve z(u) = v for u >= u_min: bracketed bisection polished by Newton steps,
// |z(u) - v| <= 1e-12 * max(1, v). Rejects v < z(u_min) (inverse undefined there).
double envelope_inverse(const Envelope& z, double v);

// Optional overrides for make_policy; unset fields take the model-derived defaults.
struct PolicyOverrides {
    std::optional<double> psi_scale;     // psi0 >= 1
    std::optional<double> psi_exponent;  // q > 0
    std::optional<double> delta_star;    // in (0, 1]
    std::optional<Envelope> envelope;
    bool strict_42 = false;  // hard-enforce the step-bound admissibility conditions
};

// Truncation policy: envelope z, step bound psi(delta) = psi0 * delta^(-q), and the
// admissible step range (0, delta_star]. Immutable after construction; the clamp level
// per step size is memoized behind a cache safe for concurrent readers.
class TruncationPolicy {
public:
    const ModelParams& params() const { return params_; }
    const Envelope& envelope() const { return envelope_; }
    double psi_scale() const { return psi_scale_; }
    double psi_exponent() const { return psi_exponent_; }
    double delta_star() const { return delta_star_; }
    bool strict_42() const { return strict_42_; }

    // Nominal step bound psi0 * delta^(-q).
    double psi(double delta) const;

    // Step bound actually used for the clamp level: max(psi(delta), z(max(1, u_min))).
    // On the admissible range psi(delta) >= psi(delta_star) >= z(1) makes the max a
    // no-op; beyond it (warning-mode runs at desk-scale steps) the floor keeps z's
    // inverse defined and the clamp level at least 1.
    double effective_psi(double delta) const;

    // One-line construction record: envelope name, psi parameters, delta_star, mode.
    const std::string& provenance() const { return provenance_; }

    // Admissibility conditions violated by this policy (empty when fully conforming).
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    friend TruncationPolicy make_policy(const ValidatedParams& p,
                                        const PolicyOverrides& overrides);
    friend double clamp_bound(const TruncationPolicy& policy, double delta);

    TruncationPolicy() = default;

    ModelParams params_;
    Envelope envelope_;
    double psi_scale_ = 1.0;
    double psi_exponent_ = 0.25;
    double delta_star_ = 1.0;
    bool strict_42_ = false;
    std::string provenance_;
    std::vector<std::string> warnings_;

    struct ClampCache {
        std::mutex mutex;
        std::map<double, double> values;
    };
    std::shared_ptr<ClampCache> cache_;
};

// Build a policy for validated parameters. Defaults: model-derived envelope, psi0 = 1,
// q = 1/4, delta_star = min(1, z(1)^-4) — the scale-free choice meeting the step-bound
// conditions (psi(delta_star) >= z(1); psi decreasing to infinity; delta^(1/4) psi <= 1)
// with equality in the binding one. Non-conforming overrides are accepted with recorded
// warnings unless strict_42 is set, in which case they throw PolicyViolation naming the
// failed condition. The envelope majorant property is spot-checked by deterministic
// random sampling at construction.
TruncationPolicy make_policy(const ValidatedParams& p,
                             const PolicyOverrides& overrides = {});

// Clamp level kappa(delta) = z^-1(effective psi(delta)); memoized per (policy, delta).
// Strict policies reject delta outside (0, delta_star].
double clamp_bound(const TruncationPolicy& policy, double delta);

// Truncated coefficients of one (policy, delta) pair with the clamp level precomputed,
// for per-step use in solver loops (no cache lookups in the hot path).
class TruncatedCoeffs {
public:
    TruncatedCoeffs(const TruncationPolicy& policy, double delta);

    double kappa() const { return kappa_; }

    // f_delta(x) = f(min(x, kappa)) for x >= 0; alpha*mu for x < 0.
    double drift(double x) const;

    // g_delta(x, y) = g(min(x, kappa), min(y, kappa)) for x, y >= 0; 0 when either
    // argument is negative (zero noise lets the positive drift branch recover the path).
    double diffusion(double x, double y) const;

private:
    ModelParams p_;
    double kappa_;
};

// Convenience single-shot forms of the truncated coefficients.
double truncated_drift(const TruncationPolicy& policy, double delta, double x);
double truncated_diffusion(const TruncationPolicy& policy, double delta, double x,
                           double y);

}  // namespace sddetem
