#pragma once

#include <cstddef>
#include <vector>

namespace sddetem {

// Parameters of the delayed rate model
//     dx(t) = alpha (mu - x(t)^gamma) dt + sigma x(t-tau)^r x(t)^theta dB(t).
// Admissible sets satisfy alpha, mu, tau > 0, sigma >= 0, gamma > 1, r, theta > 0 and the
// moment condition 1 + gamma > 2 (r + theta).
struct ModelParams {
    double alpha = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double tau = 0.0;
};

namespace detail {
struct UncheckedAccess;  // test-only bypass, defined in sddetem/testing.hpp
}

class ValidatedParams;
ValidatedParams validate_params(const ModelParams& p);

// Proof token: a parameter set that passed validate_params(). Solvers and policies accept
// only this type, so an unvalidated set cannot reach the numerics by construction.
class ValidatedParams {
public:
    const ModelParams& get() const { return p_; }
    const ModelParams* operator->() const { return &p_; }

private:
    explicit ValidatedParams(const ModelParams& p) : p_(p) {}
    friend ValidatedParams validate_params(const ModelParams& p);
    friend struct detail::UncheckedAccess;
    ModelParams p_;
};

// x^e with exact small-integer fast paths; the single power kernel shared by raw and
// truncated coefficients so the two agree bit-for-bit on the unclamped region.
double power(double x, double e);

// f(x) = alpha (mu - x^gamma) on [0, inf); negative x is a domain error.
double drift(const ModelParams& p, double x);

// g(x, y) = sigma x^theta y^r on [0, inf)^2 (y is the delayed state); negative arguments
// are a domain error.
double diffusion(const ModelParams& p, double x, double y);

// Initial function xi on [-tau, 0], sampled at spacing tau/M (M+1 values, k = -M..0),
// carried with its Holder certificate: |xi(t) - xi(s)| <= D |t-s|^ell on the grid.
// Construction enforces strict positivity and checks the certificate (constant segments
// short-circuit to an O(M) equality scan).
class InitialSegment {
public:
    InitialSegment(std::vector<double> grid_values, double tau, double holder_d,
                   double holder_ell);

    std::size_t lag_steps() const { return values_.size() - 1; }  // M
    double value(std::ptrdiff_t k) const;                         // k in [-M, 0]
    const std::vector<double>& values() const { return values_; }
    double tau() const { return tau_; }
    double holder_d() const { return holder_d_; }
    double holder_ell() const { return holder_ell_; }

private:
    std::vector<double> values_;
    double tau_;
    double holder_d_;
    double holder_ell_;
};

// Constant segment xi == c with the trivial certificate (D = 0, ell = 1).
InitialSegment constant_initial(double c, double tau, std::size_t lag_steps);

// Exhaustive pairwise Holder check over the sampled grid (O(n^2), precomputed distance
// table; tiny relative slack so exact-equality pairs survive rounding).
bool verify_holder(const std::vector<double>& values, double tau, double holder_d,
                   double holder_ell);

}  // namespace sddetem
