#include "scs/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scs/errors.hpp"
#include "scs/parallel.hpp"
#include "scs/random.hpp"

namespace scs {

namespace {

void check_k(const Vector& x, Eigen::Index k) {
    if (k < 0 || k > x.size()) throw InvalidArgument("best-k approximation: k out of range [0, N]");
}

double std_error(double sum, double sum_sq, double count) {
    const double mean = sum / count;
    const double var = std::max(0.0, sum_sq / count - mean * mean);
    return std::sqrt(var / count);
}

}  // namespace

Vector best_k_linear(const Vector& x, Eigen::Index k) {
    check_k(x, k);
    Vector out = Vector::Zero(x.size());
    out.head(k) = x.head(k);
    return out;
}

Vector best_k_nonlinear(const Vector& x, Eigen::Index k) {
    check_k(x, k);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&x](Eigen::Index a, Eigen::Index b) { return std::abs(x[a]) > std::abs(x[b]); });
    Vector out = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i < k; ++i) out[order[static_cast<std::size_t>(i)]] = x[order[static_cast<std::size_t>(i)]];
    return out;
}

ApproxErrorReport approx_error_report(const Spectrum& spectrum, Eigen::Index k, std::int64_t trials,
                                      std::uint64_t seed) {
    if (trials < 1) throw InvalidArgument("approx_error_report: trials must be >= 1");
    if (k < 0 || k > spectrum.size()) throw InvalidArgument("approx_error_report: k out of range");
    const Vector scale = spectrum.values().cwiseSqrt();

    std::vector<double> lin(static_cast<std::size_t>(trials));
    std::vector<double> nonlin(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        Rng rng(derive_seed(seed, t));
        const Vector x = scale.cwiseProduct(standard_normal_vector(scale.size(), rng));
        lin[t] = (x - best_k_linear(x, k)).squaredNorm();
        nonlin[t] = (x - best_k_nonlinear(x, k)).squaredNorm();
    });

    double s_lin = 0, s2_lin = 0, s_non = 0, s2_non = 0, s_diff = 0, s2_diff = 0;
    for (std::size_t t = 0; t < lin.size(); ++t) {
        s_lin += lin[t];
        s2_lin += lin[t] * lin[t];
        s_non += nonlin[t];
        s2_non += nonlin[t] * nonlin[t];
        const double d = lin[t] - nonlin[t];
        s_diff += d;
        s2_diff += d * d;
    }
    const auto n = static_cast<double>(trials);
    ApproxErrorReport r;
    r.k = k;
    r.trials = trials;
    r.linear_mse = s_lin / n;
    r.nonlinear_mse = s_non / n;
    r.linear_mse_closed_form = spectrum.tail_sum(k);
    r.linear_std_error = std_error(s_lin, s2_lin, n);
    r.nonlinear_std_error = std_error(s_non, s2_non, n);
    r.difference_std_error = std_error(s_diff, s2_diff, n);
    r.signal_energy = spectrum.sum();
    return r;
}

}  // namespace scs
