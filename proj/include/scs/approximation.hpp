#pragma once

#include <cstdint>

#include "scs/gaussian_model.hpp"
#include "scs/types.hpp"

namespace scs {

/// Keeps the first k coefficients (fixed support) and zeroes the rest.
Vector best_k_linear(const Vector& x, Eigen::Index k);

/// Keeps the k largest-magnitude coefficients; on equal magnitude the lower index wins.
Vector best_k_nonlinear(const Vector& x, Eigen::Index k);

/// Monte Carlo best k-term errors for x ~ N(0, diag(spectrum)).
struct ApproxErrorReport {
    Eigen::Index k = 0;
    double linear_mse = 0.0;
    double nonlinear_mse = 0.0;
    double linear_mse_closed_form = 0.0;
    double linear_std_error = 0.0;
    double nonlinear_std_error = 0.0;
    /// Standard error of the paired per-sample difference linear - nonlinear.
    double difference_std_error = 0.0;
    /// E||x||^2 = sum of the spectrum; the normalization used by the figures.
    double signal_energy = 0.0;
    std::int64_t trials = 0;

    double normalized_linear() const { return linear_mse / signal_energy; }
    double normalized_nonlinear() const { return nonlinear_mse / signal_energy; }
};

ApproxErrorReport approx_error_report(const Spectrum& spectrum, Eigen::Index k, std::int64_t trials,
                                      std::uint64_t seed);

}  // namespace scs
