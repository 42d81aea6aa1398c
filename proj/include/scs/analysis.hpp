#pragma once

#include <cstdint>
#include <vector>

#include "scs/gaussian_model.hpp"
#include "scs/sensing.hpp"
#include "scs/types.hpp"

namespace scs {

/// SCS decoding error against the best k-term linear error, both normalized by the
/// expected signal energy sum(lambda).
struct ScsRatioReport {
    Eigen::Index k = 0;
    Eigen::Index m = 0;
    double scs_mse = 0.0;
    double scs_std_error = 0.0;
    double bestk_mse = 0.0;
    /// scs_mse / bestk_mse; NaN when the best k-term error is zero.
    double ratio = 0.0;
    double ratio_std_error = 0.0;
    std::int64_t trials = 0;
};

/// Draws x ~ N(0, diag(spectrum)) and a fresh M x N matrix of `family` per trial, decodes
/// with the linear MAP decoder and averages ||x - x_hat||^2.
ScsRatioReport scs_vs_bestk_ratio(const Spectrum& spectrum, Eigen::Index k, Eigen::Index m,
                                  SensingFamily family, std::int64_t trials, std::uint64_t seed);

/// Same estimate with one fixed sensing matrix for every trial.
ScsRatioReport scs_vs_bestk_ratio(const Spectrum& spectrum, Eigen::Index k, const SensingMatrix& phi,
                                  std::int64_t trials, std::uint64_t seed);

/// RIP-in-expectation constants on K = {1..k} and its complement, for the decode
/// residual eta = x - Delta(Phi x) of the unregularized decoder.
struct RipExpectationReport {
    double a_K = 0.0;
    double b_K = 0.0;
    double c0 = 0.0;
    double c0_std_error = 0.0;
    Eigen::Index k = 0;
    Eigen::Index m = 0;
    SensingFamily family = SensingFamily::GaussianIID;
    std::int64_t trials = 0;

    /// E||eta||^2, E||eta_K||^2 and E||eta_K^C||^2.
    double residual_energy = 0.0;
    double residual_head_energy = 0.0;
    double residual_tail_energy = 0.0;
    /// E||eta||^2 / E||eta_K^C||^2 and its delta-method standard error.
    double null_space_ratio = 0.0;
    double null_space_ratio_std_error = 0.0;
    /// Tail sum of the model spectrum past k: the best k-term linear error.
    double best_k_error = 0.0;
};

/// Throws UndefinedConstant when E||eta_K||^2 or E||eta_K^C||^2 vanishes.
RipExpectationReport rip_expectation(const GaussianModel& model, SensingFamily family, Eigen::Index k,
                                     Eigen::Index m, std::int64_t trials, std::uint64_t seed);

/// Closed-form c_K = Tr(Phi R_K Res R_K Phi^T) / Tr(R_K Res R_K) for x ~ N(0, diag(spectrum))
/// and a fixed Phi, where Res is the residual covariance. `support` holds zero-based indices.
double rip_constant_closed_form(const Spectrum& spectrum, const SensingMatrix& phi,
                                const std::vector<int>& support);

/// 1/2 (Tr(Sigma2^-1 Sigma1) - N). Matches the Gaussian KL divergence when |Sigma1| = |Sigma2|.
double kl_gaussians(const Matrix& sigma1, const Matrix& sigma2);

enum class SelectionMode { Oracle, Compressed };

struct SelectionReport {
    double p_correct = 0.0;
    double p_std_error = 0.0;
    /// Reconstruction MSE normalized by E||x||^2 (zero for the oracle).
    double mse = 0.0;
    double mse_std_error = 0.0;
    Eigen::Index m = 0;
    std::int64_t trials = 0;
    SelectionMode mode = SelectionMode::Oracle;
    /// log|Sigma1| - log|Sigma2|; the selection rule is only symmetric when this is zero.
    double log_det_gap = 0.0;
};

/// Fraction of x ~ model1 with x^T S1^-1 x + log|S1| < x^T S2^-1 x + log|S2|. Exact ties
/// are resolved with a seeded fair coin.
SelectionReport oracle_selection_prob(const GaussianModel& model1, const GaussianModel& model2,
                                      std::int64_t trials, std::uint64_t seed);

/// Draws x ~ model1, senses with a fresh M x N matrix, decodes with both models and
/// applies the log-posterior selection rule (exact ties by fair coin).
SelectionReport compressed_selection_prob(const GaussianModel& model1, const GaussianModel& model2,
                                          Eigen::Index m, SensingFamily family, std::int64_t trials,
                                          std::uint64_t seed);

struct ViolationRate {
    double rate = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
};

/// Sampling check of the linear RIP: per trial a fresh Gaussian M x N matrix, one of the
/// N/k consecutive-coordinate blocks at random and a random unit vector supported on it;
/// counts how often ||Phi x|| leaves [1 - delta, 1 + delta].
ViolationRate linear_rip_violation_rate(Eigen::Index m, Eigen::Index n, Eigen::Index k, double delta,
                                        std::int64_t trials, std::uint64_t seed);

}  // namespace scs
