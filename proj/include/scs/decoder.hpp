#pragma once

#include <vector>

#include "scs/gaussian_model.hpp"
#include "scs/sensing.hpp"
#include "scs/types.hpp"

namespace scs {

/// Relative ridge used by the Monte Carlo analyses. Small enough that an invertible
/// M = N system decodes to ~1e-13 relative error, large enough that an exactly
/// singular Cholesky pivot does not abort a run.
inline constexpr double kAnalysisRegEpsilon = 1e-14;
/// Relative ridge used inside MAP-EM, where covariances are estimated from few signals.
inline constexpr double kEmRegEpsilon = 1e-6;

/// x_hat = mean + gain (y - Phi mean), with gain = Sigma Phi^T (Phi Sigma Phi^T + ridge I)^-1
/// and ridge = reg_epsilon * Tr(Phi Sigma Phi^T) / M.
class LinearDecoder {
public:
    const Matrix& gain() const { return gain_; }
    const Vector& model_mean() const { return mean_; }
    const SensingMatrix& phi() const { return phi_; }

    Vector decode(const Vector& y) const;

private:
    friend LinearDecoder linear_map_decoder(const GaussianModel&, const SensingMatrix&, double);

    Matrix gain_;
    Vector mean_;
    Vector projected_mean_;
    SensingMatrix phi_;
};

/// Throws SingularSystem when Phi Sigma Phi^T cannot be Cholesky-factored.
LinearDecoder linear_map_decoder(const GaussianModel& model, const SensingMatrix& phi,
                                 double reg_epsilon = kAnalysisRegEpsilon);

inline Vector decode(const LinearDecoder& dec, const Vector& y) { return dec.decode(y); }

/// Single-signal MAP estimate without materializing the gain (one Cholesky + two solves).
Vector map_estimate(const GaussianModel& model, const SensingMatrix& phi, const Vector& y,
                    double reg_epsilon = kAnalysisRegEpsilon);

/// Tr(Sigma - Sigma Phi^T (Phi Sigma Phi^T)^-1 Phi Sigma), clamped to [0, Tr(Sigma)].
double theoretical_mse(const GaussianModel& model, const SensingMatrix& phi,
                       double reg_epsilon = kAnalysisRegEpsilon);

/// Residual covariance Sigma - Sigma Phi^T (Phi Sigma Phi^T)^-1 Phi Sigma.
Matrix residual_covariance(const GaussianModel& model, const SensingMatrix& phi,
                           double reg_epsilon = kAnalysisRegEpsilon);

/// -1/2 (log|Sigma| + (x - mu)^T Sigma^-1 (x - mu)); the N log(2 pi) / 2 term is dropped.
double model_score(const GaussianModel& model, const Vector& x);

struct DecodeResult {
    Vector estimate;
    int selected_model = 0;
    std::vector<double> scores;
};

/// Decodes y with every model's linear MAP filter and keeps the estimate whose model
/// scores highest. Ties go to the lowest index.
DecodeResult gmm_decode(const Gmm& gmm, const SensingMatrix& phi, const Vector& y,
                        double reg_epsilon = kAnalysisRegEpsilon);

}  // namespace scs
