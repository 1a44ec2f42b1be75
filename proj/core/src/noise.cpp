#include "sddetem/noise.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sddetem {

namespace {

// splitmix64 finalizer: mixes the (seed, path_id) key into a well-spread engine seed so
// consecutive path ids give statistically unrelated streams.
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t path_id) {
    return splitmix64(splitmix64(seed) ^ splitmix64(path_id + 0x6a09e667f3bcc909ULL));
}

// Uniform in (0, 1), never hitting either endpoint: top 53 bits, centered on the cell.
double to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

// Wichura's algorithm AS 241, PPND16: minimax rational approximations to the normal
// quantile on three regions; relative error below ~1e-15 over (0, 1).
double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inverse_normal_cdf requires p in (0, 1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        x = num / den;
    }
    return q < 0.0 ? -x : x;
}

IncrementStream generate(std::uint64_t seed, std::uint64_t path_id, double delta,
                         std::size_t count) {
    if (count == 0) throw std::invalid_argument("generate: count must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("generate: delta must be > 0");
    IncrementStream s;
    s.seed_ = seed;
    s.path_id_ = path_id;
    s.delta_ = delta;
    s.values_.resize(count);
    s.nodes_.resize(count + 1);
    std::mt19937_64 engine(mix_key(seed, path_id));
    const double scale = std::sqrt(delta);
    s.nodes_[0] = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double z = inverse_normal_cdf(to_unit(engine()));
        s.values_[k] = z * scale;
        s.nodes_[k + 1] = s.nodes_[k] + s.values_[k];
    }
    return s;
}

IncrementStream coarsen(const IncrementStream& fine, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("coarsen: factor must be >= 1");
    if (fine.count() % factor != 0)
        throw std::invalid_argument("coarsen: factor must divide the increment count");
    if (factor == 1) return fine;  // exact identity, not a re-differenced copy
    IncrementStream s;
    s.seed_ = fine.seed_;
    s.path_id_ = fine.path_id_;
    s.delta_ = fine.delta_ * static_cast<double>(factor);
    const std::size_t n = fine.count() / factor;
    s.values_.resize(n);
    s.nodes_.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) s.nodes_[j] = fine.nodes_[j * factor];
    for (std::size_t j = 0; j < n; ++j) s.values_[j] = s.nodes_[j + 1] - s.nodes_[j];
    return s;
}

}  // namespace sddetem
