#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "scs/random.hpp"
#include "scs/types.hpp"

namespace scs {

/// Default relative eigenvalue floor: eigenvalues below reg * Tr(Sigma) / N are raised
/// to that value before computing the inverse and the log-determinant.
inline constexpr double kDefaultRegEpsilon = 1e-6;

/// Eigenvalues of a covariance, non-negative and sorted non-increasing.
class Spectrum {
public:
    /// Throws InvalidArgument when empty, negative or not sorted non-increasing.
    explicit Spectrum(Vector eigenvalues);

    const Vector& values() const { return values_; }
    Eigen::Index size() const { return values_.size(); }
    double operator[](Eigen::Index i) const { return values_[i]; }
    double sum() const { return values_.sum(); }
    /// Sum of the eigenvalues with index >= k (zero-based), i.e. the best k-term linear error.
    double tail_sum(Eigen::Index k) const;

private:
    Vector values_;
};

/// lambda_m = m^(-alpha), m = 1..N.
Spectrum power_decay_spectrum(int n, double alpha);

/// A Gaussian prior N(mean, covariance) together with its cached eigendecomposition.
///
/// The stored spectrum is the exact decomposition of the covariance. Inversion and the
/// log-determinant use the floored spectrum max(lambda, reg * Tr / N); with reg = 0 a
/// degenerate covariance is kept as is and every operation needing the inverse throws
/// SingularSystem.
class GaussianModel {
public:
    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return covariance_; }
    const Matrix& pca_basis() const { return basis_; }
    const Spectrum& spectrum() const { return spectrum_; }
    double log_det() const { return log_det_; }
    double reg_epsilon() const { return reg_epsilon_; }
    /// Absolute eigenvalue floor reg * Tr(Sigma) / N.
    double eigenvalue_floor() const { return floor_; }
    Eigen::Index dimension() const { return mean_.size(); }
    bool invertible() const { return invertible_; }

    /// (x - mean)^T Sigma^-1 (x - mean), using the floored spectrum.
    double mahalanobis_squared(const Vector& x) const;
    /// Sigma^-1 built from the floored spectrum.
    Matrix precision() const;
    /// True when some eigenvalue sits below the floor.
    bool floor_active() const { return floor_active_; }
    /// Sigma Sigma_floored^-1 Sigma, so that (Sigma u)^T Sigma_floored^-1 (Sigma u) = u^T K u.
    /// Equals the covariance when the floor is inactive.
    const Matrix& quadratic_kernel() const;

private:
    friend GaussianModel make_gaussian(Vector mean, Matrix covariance, double reg_epsilon);

    GaussianModel(Vector mean, Matrix covariance, Matrix basis, Spectrum spectrum, double reg_epsilon);

    Vector mean_;
    Matrix covariance_;
    Matrix basis_;
    Spectrum spectrum_;
    double reg_epsilon_ = 0.0;
    double floor_ = 0.0;
    double log_det_ = 0.0;
    bool invertible_ = false;
    bool floor_active_ = false;
    Matrix quadratic_kernel_;
    // diag(floored^-1/2) * B^T; empty when not invertible.
    Matrix whitening_;
};

/// Validates, symmetrizes and decomposes a covariance. Eigenvectors are canonicalized so
/// their largest-magnitude entry is positive.
GaussianModel make_gaussian(Vector mean, Matrix covariance, double reg_epsilon = kDefaultRegEpsilon);

/// Zero-mean convenience overload.
GaussianModel make_gaussian(Matrix covariance, double reg_epsilon = kDefaultRegEpsilon);

/// B * diag(spectrum) * B^T, symmetrized. Throws InvalidArgument unless B is orthonormal.
Matrix rotate_spectrum(const Spectrum& spectrum, const Matrix& basis);

Matrix rotation_2d(double theta);

/// Sigma1 = diag(spectrum) and Sigma2 = diag(reversed spectrum): two zero-mean Gaussians
/// with a common spectrum whose bases are related by the anti-diagonal permutation.
std::pair<GaussianModel, GaussianModel> anti_diagonal_pair(int n, const Spectrum& spectrum,
                                                          double reg_epsilon = kDefaultRegEpsilon);

/// Draws `count` samples as the columns of an N x count matrix.
Matrix sample(const GaussianModel& model, Eigen::Index count, Rng& rng);

/// Ordered collection of Gaussian priors sharing one dimension.
class Gmm {
public:
    explicit Gmm(std::vector<GaussianModel> models);

    std::size_t size() const { return models_.size(); }
    Eigen::Index dimension() const { return models_.front().dimension(); }
    const GaussianModel& operator[](std::size_t j) const { return models_[j]; }
    const std::vector<GaussianModel>& models() const { return models_; }
    auto begin() const { return models_.begin(); }
    auto end() const { return models_.end(); }

private:
    std::vector<GaussianModel> models_;
};

// Binary container: "SCSG", version:u32, N:u32, J:u32, then per model the mean (N f64)
// and the covariance (N*N f64, row-major), all little-endian.
inline constexpr std::uint32_t kGmmFormatVersion = 1;

void save_gmm(const Gmm& gmm, std::ostream& out);
Gmm load_gmm(std::istream& in, double reg_epsilon = kDefaultRegEpsilon);
void save_gmm(const Gmm& gmm, const std::filesystem::path& path);
Gmm load_gmm(const std::filesystem::path& path, double reg_epsilon = kDefaultRegEpsilon);

}  // namespace scs
