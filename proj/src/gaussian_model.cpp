#include "scs/gaussian_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "scs/binary_io.hpp"
#include "scs/errors.hpp"

namespace scs {

namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kNegativeEigenTolerance = 1e-8;
constexpr double kOrthonormalTolerance = 1e-9;

void canonicalize_signs(Matrix& basis) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index arg = 0;
        basis.col(c).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, c) < 0.0) basis.col(c) *= -1.0;
    }
}

}  // namespace

Spectrum::Spectrum(Vector eigenvalues) : values_(std::move(eigenvalues)) {
    if (values_.size() < 1) throw InvalidArgument("spectrum must have at least one eigenvalue");
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
            throw InvalidArgument("spectrum entries must be finite and non-negative");
        }
        if (i > 0 && values_[i] > values_[i - 1]) {
            throw InvalidArgument("spectrum must be sorted non-increasing");
        }
    }
}

double Spectrum::tail_sum(Eigen::Index k) const {
    if (k < 0 || k > values_.size()) throw InvalidArgument("tail index out of range");
    return values_.tail(values_.size() - k).sum();
}

Spectrum power_decay_spectrum(int n, double alpha) {
    if (n < 1) throw InvalidArgument("power_decay_spectrum: N must be >= 1");
    if (!(alpha > 0.0)) throw InvalidArgument("power_decay_spectrum: alpha must be > 0");
    Vector v(n);
    for (int m = 1; m <= n; ++m) v[m - 1] = std::pow(static_cast<double>(m), -alpha);
    return Spectrum(std::move(v));
}

GaussianModel::GaussianModel(Vector mean, Matrix covariance, Matrix basis, Spectrum spectrum,
                             double reg_epsilon)
    : mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      basis_(std::move(basis)),
      spectrum_(std::move(spectrum)),
      reg_epsilon_(reg_epsilon) {
    const auto n = static_cast<double>(spectrum_.size());
    floor_ = reg_epsilon_ * spectrum_.sum() / n;
    const Vector floored = spectrum_.values().cwiseMax(floor_);
    invertible_ = (floored.array() > 0.0).all();
    if (invertible_) {
        log_det_ = floored.array().log().sum();
        whitening_ = floored.cwiseSqrt().cwiseInverse().asDiagonal() * basis_.transpose();
        floor_active_ = (spectrum_.values().array() < floor_).any();
        if (floor_active_) {
            const Matrix half = basis_ * (spectrum_.values().array() / floored.array().sqrt()).matrix().asDiagonal();
            quadratic_kernel_ = half * half.transpose();
        }
    } else {
        log_det_ = -std::numeric_limits<double>::infinity();
    }
}

double GaussianModel::mahalanobis_squared(const Vector& x) const {
    if (!invertible_) throw SingularSystem("covariance is singular (reg_epsilon = 0 with zero eigenvalue)");
    if (x.size() != dimension()) throw InvalidArgument("mahalanobis_squared: dimension mismatch");
    return (whitening_ * (x - mean_)).squaredNorm();
}

const Matrix& GaussianModel::quadratic_kernel() const {
    if (!invertible_) throw SingularSystem("covariance is singular (reg_epsilon = 0 with zero eigenvalue)");
    return floor_active_ ? quadratic_kernel_ : covariance_;
}

Matrix GaussianModel::precision() const {
    if (!invertible_) throw SingularSystem("covariance is singular (reg_epsilon = 0 with zero eigenvalue)");
    return whitening_.transpose() * whitening_;
}

GaussianModel make_gaussian(Vector mean, Matrix covariance, double reg_epsilon) {
    const Eigen::Index n = covariance.rows();
    if (n < 1 || covariance.cols() != n) throw InvalidArgument("make_gaussian: covariance must be square");
    if (mean.size() != n) throw InvalidArgument("make_gaussian: mean and covariance dimensions differ");
    if (!(reg_epsilon >= 0.0)) throw InvalidArgument("make_gaussian: reg_epsilon must be >= 0");
    if (!covariance.allFinite() || !mean.allFinite()) throw InvalidCovariance("make_gaussian: non-finite entries");

    const double scale = covariance.cwiseAbs().rowwise().sum().maxCoeff();
    const double asymmetry = (covariance - covariance.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
    if (asymmetry > kSymmetryTolerance * scale) {
        throw InvalidCovariance("make_gaussian: covariance is not symmetric");
    }
    Matrix sym = 0.5 * (covariance + covariance.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw InvalidCovariance("make_gaussian: eigendecomposition failed");

    // Eigen returns ascending order; reorder to non-increasing, keeping ties in place.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return eig.eigenvalues()[a] > eig.eigenvalues()[b];
    });
    Vector values(n);
    Matrix basis(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        values[i] = eig.eigenvalues()[order[static_cast<std::size_t>(i)]];
        basis.col(i) = eig.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    }

    const double mean_eigen = sym.trace() / static_cast<double>(n);
    const double negative_limit = -kNegativeEigenTolerance * std::max(mean_eigen, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values[i] < 0.0) {
            if (values[i] < negative_limit) {
                throw InvalidCovariance("make_gaussian: covariance has a negative eigenvalue " +
                                        std::to_string(values[i]));
            }
            values[i] = 0.0;
        }
    }
    canonicalize_signs(basis);
    return GaussianModel(std::move(mean), std::move(sym), std::move(basis), Spectrum(std::move(values)),
                         reg_epsilon);
}

GaussianModel make_gaussian(Matrix covariance, double reg_epsilon) {
    Vector mean = Vector::Zero(covariance.rows());
    return make_gaussian(std::move(mean), std::move(covariance), reg_epsilon);
}

Matrix rotate_spectrum(const Spectrum& spectrum, const Matrix& basis) {
    const Eigen::Index n = spectrum.size();
    if (basis.rows() != n || basis.cols() != n) throw InvalidArgument("rotate_spectrum: basis must be N x N");
    const double err = (basis.transpose() * basis - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (err > kOrthonormalTolerance) throw InvalidArgument("rotate_spectrum: basis is not orthonormal");
    Matrix cov = basis * spectrum.values().asDiagonal() * basis.transpose();
    return 0.5 * (cov + cov.transpose());
}

Matrix rotation_2d(double theta) {
    Matrix r(2, 2);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    r << c, -s, s, c;
    return r;
}

std::pair<GaussianModel, GaussianModel> anti_diagonal_pair(int n, const Spectrum& spectrum, double reg_epsilon) {
    if (n < 2) throw InvalidArgument("anti_diagonal_pair: N must be >= 2");
    if (spectrum.size() != n) throw InvalidArgument("anti_diagonal_pair: spectrum length differs from N");
    const Matrix flip = Matrix::Identity(n, n).rowwise().reverse();
    return {make_gaussian(rotate_spectrum(spectrum, Matrix::Identity(n, n)), reg_epsilon),
            make_gaussian(rotate_spectrum(spectrum, flip), reg_epsilon)};
}

Matrix sample(const GaussianModel& model, Eigen::Index count, Rng& rng) {
    if (count < 1) throw InvalidArgument("sample: count must be >= 1");
    const Eigen::Index n = model.dimension();
    const Matrix factor = model.pca_basis() * model.spectrum().values().cwiseSqrt().asDiagonal();
    Matrix z(n, count);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index c = 0; c < count; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) z(r, c) = normal(rng);
    }
    Matrix out = factor * z;
    out.colwise() += model.mean();
    return out;
}

Gmm::Gmm(std::vector<GaussianModel> models) : models_(std::move(models)) {
    if (models_.empty()) throw InvalidArgument("Gmm: need at least one model");
    for (const auto& m : models_) {
        if (m.dimension() != models_.front().dimension()) throw InvalidArgument("Gmm: models differ in dimension");
    }
}

void save_gmm(const Gmm& gmm, std::ostream& out) {
    const auto n = gmm.dimension();
    io::write_magic(out, "SCSG");
    io::write_u32(out, kGmmFormatVersion);
    io::write_u32(out, static_cast<std::uint32_t>(n));
    io::write_u32(out, static_cast<std::uint32_t>(gmm.size()));
    for (const auto& model : gmm) {
        for (Eigen::Index i = 0; i < n; ++i) io::write_f64(out, model.mean()[i]);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) io::write_f64(out, model.covariance()(r, c));
        }
    }
    if (!out) throw IoError("save_gmm: write failed");
}

Gmm load_gmm(std::istream& in, double reg_epsilon) {
    io::expect_magic(in, "SCSG");
    const auto version = io::read_u32(in, "gmm version");
    if (version != kGmmFormatVersion) throw UnsupportedFormat("gmm container version " + std::to_string(version));
    const auto n = static_cast<Eigen::Index>(io::read_u32(in, "gmm dimension"));
    const auto j = io::read_u32(in, "gmm model count");
    if (n < 1 || j < 1) throw ParseError("gmm container: empty dimension or model count");
    std::vector<GaussianModel> models;
    models.reserve(j);
    for (std::uint32_t m = 0; m < j; ++m) {
        Vector mean(n);
        Matrix cov(n, n);
        for (Eigen::Index i = 0; i < n; ++i) mean[i] = io::read_f64(in, "gmm mean");
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) cov(r, c) = io::read_f64(in, "gmm covariance");
        }
        models.push_back(make_gaussian(std::move(mean), std::move(cov), reg_epsilon));
    }
    return Gmm(std::move(models));
}

void save_gmm(const Gmm& gmm, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    save_gmm(gmm, out);
}

Gmm load_gmm(const std::filesystem::path& path, double reg_epsilon) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load_gmm(in, reg_epsilon);
}

}  // namespace scs
