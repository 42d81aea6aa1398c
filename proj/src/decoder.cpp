#include "scs/decoder.hpp"

#include <algorithm>
#include <string>

#include "scs/errors.hpp"

namespace scs {

namespace {

// Pivots below this fraction of the largest diagonal entry are treated as singular.
constexpr double kPivotTolerance = 1e-15;

/// Sigma Phi^T and the Cholesky factor of Phi Sigma Phi^T + ridge I.
struct Factored {
    Matrix cross;  // N x M; left empty when only the gram matrix was needed
    Eigen::LLT<Matrix> llt;
    double ridge = 0.0;
};

void check_shapes(const GaussianModel& model, const SensingMatrix& phi, double reg_epsilon) {
    const Eigen::Index n = model.dimension();
    if (phi.cols() != n) throw InvalidArgument("decoder: sensing matrix has " + std::to_string(phi.cols()) +
                                               " columns, model dimension is " + std::to_string(n));
    if (!(reg_epsilon >= 0.0)) throw InvalidArgument("decoder: reg_epsilon must be >= 0");
}

void factor_gram(Factored& f, Matrix gram, double reg_epsilon) {
    const Eigen::Index m = gram.rows();
    gram = 0.5 * (gram + gram.transpose());
    const double max_diag = gram.diagonal().maxCoeff();
    if (reg_epsilon > 0.0) {
        f.ridge = reg_epsilon * gram.trace() / static_cast<double>(m);
        gram.diagonal().array() += f.ridge;
    }
    f.llt.compute(gram);
    if (f.llt.info() != Eigen::Success || !(max_diag > 0.0)) {
        throw SingularSystem("Phi Sigma Phi^T is singular");
    }
    const auto diag = f.llt.matrixLLT().diagonal();
    const double min_pivot = diag.cwiseAbs2().minCoeff();
    if (!(min_pivot > kPivotTolerance * max_diag)) throw SingularSystem("Phi Sigma Phi^T is numerically singular");
}

Matrix selected_cross(const Matrix& sigma, const std::vector<int>& rows) {
    Matrix cross(sigma.rows(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) cross.col(static_cast<Eigen::Index>(j)) = sigma.col(rows[j]);
    return cross;
}

Factored factor(const GaussianModel& model, const SensingMatrix& phi, double reg_epsilon, bool need_cross = true) {
    check_shapes(model, phi, reg_epsilon);
    const Matrix& sigma = model.covariance();
    const Eigen::Index m = phi.rows();

    Factored f;
    Matrix gram(m, m);
    if (phi.is_coordinate_selection()) {
        const auto& rows = phi.selected_rows();
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < m; ++i) gram(i, j) = sigma(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
        }
        if (need_cross) f.cross = selected_cross(sigma, rows);
    } else {
        f.cross.noalias() = sigma * phi.matrix().transpose();
        gram.noalias() = phi.matrix() * f.cross;
    }
    factor_gram(f, std::move(gram), reg_epsilon);
    return f;
}

// Sigma Phi^T w, reusing the cross product when it was formed.
Vector lift(const GaussianModel& model, const SensingMatrix& phi, const Factored& f, const Vector& w) {
    if (f.cross.size() > 0) return f.cross * w;
    const auto& rows = phi.selected_rows();
    Vector out = Vector::Zero(model.dimension());
    for (std::size_t j = 0; j < rows.size(); ++j) out += w[static_cast<Eigen::Index>(j)] * model.covariance().col(rows[j]);
    return out;
}

}  // namespace

Vector LinearDecoder::decode(const Vector& y) const {
    if (y.size() != gain_.cols()) throw InvalidArgument("decode: measurement dimension does not match M");
    return mean_ + gain_ * (y - projected_mean_);
}

LinearDecoder linear_map_decoder(const GaussianModel& model, const SensingMatrix& phi, double reg_epsilon) {
    const Factored f = factor(model, phi, reg_epsilon);
    LinearDecoder dec;
    // gain = cross * G^-1, computed as (G^-1 cross^T)^T since G is symmetric.
    dec.gain_ = f.llt.solve(f.cross.transpose()).transpose();
    dec.mean_ = model.mean();
    dec.projected_mean_ = phi.apply(model.mean());
    dec.phi_ = phi;
    return dec;
}

Vector map_estimate(const GaussianModel& model, const SensingMatrix& phi, const Vector& y, double reg_epsilon) {
    if (y.size() != phi.rows()) throw InvalidArgument("map_estimate: measurement dimension does not match M");
    const Factored f = factor(model, phi, reg_epsilon);
    Vector innovation = y - phi.apply(model.mean());
    return model.mean() + f.cross * f.llt.solve(innovation);
}

Matrix residual_covariance(const GaussianModel& model, const SensingMatrix& phi, double reg_epsilon) {
    const Factored f = factor(model, phi, reg_epsilon);
    const Matrix half = f.llt.matrixL().solve(f.cross.transpose());  // L^-1 Phi Sigma
    Matrix r = model.covariance() - half.transpose() * half;
    return 0.5 * (r + r.transpose());
}

double theoretical_mse(const GaussianModel& model, const SensingMatrix& phi, double reg_epsilon) {
    const Factored f = factor(model, phi, reg_epsilon);
    const Matrix half = f.llt.matrixL().solve(f.cross.transpose());
    const double total = model.covariance().trace();
    return std::clamp(total - half.squaredNorm(), 0.0, total);
}

double model_score(const GaussianModel& model, const Vector& x) {
    return -0.5 * (model.log_det() + model.mahalanobis_squared(x));
}

DecodeResult gmm_decode(const Gmm& gmm, const SensingMatrix& phi, const Vector& y, double reg_epsilon) {
    if (y.size() != phi.rows()) throw InvalidArgument("gmm_decode: measurement dimension does not match M");
    DecodeResult result;
    result.scores.resize(gmm.size());
    double best = 0.0;
    for (std::size_t j = 0; j < gmm.size(); ++j) {
        try {
            const GaussianModel& model = gmm[j];
            const Factored f = factor(model, phi, reg_epsilon, !phi.is_coordinate_selection());
            const Vector innovation = y - phi.apply(model.mean());
            const Vector w = f.llt.solve(innovation);
            Vector estimate;
            double score = 0.0;
            if (!model.invertible()) {
                estimate = model.mean() + lift(model, phi, f, w);
                score = model_score(model, estimate);
            } else {
                // x - mu = Sigma u with u = Phi^T w, so the quadratic form is u^T K u.
                double quad = 0.0;
                if (!model.floor_active()) {
                    quad = w.dot(innovation) - f.ridge * w.squaredNorm();
                } else if (phi.is_coordinate_selection()) {
                    const Matrix& k = model.quadratic_kernel();
                    const auto& rows = phi.selected_rows();
                    for (std::size_t b = 0; b < rows.size(); ++b) {
                        double acc = 0.0;
                        for (std::size_t a = 0; a < rows.size(); ++a) acc += k(rows[a], rows[b]) * w[static_cast<Eigen::Index>(a)];
                        quad += acc * w[static_cast<Eigen::Index>(b)];
                    }
                } else {
                    const Vector u = phi.matrix().transpose() * w;
                    quad = u.dot(model.quadratic_kernel() * u);
                }
                score = -0.5 * (model.log_det() + std::max(quad, 0.0));
            }
            result.scores[j] = score;
            if (j == 0 || score > best) {
                best = score;
                result.selected_model = static_cast<int>(j);
                result.estimate = estimate.size() > 0 ? std::move(estimate) : model.mean() + lift(model, phi, f, w);
            }
        } catch (const SingularSystem& e) {
            throw SingularSystem("model " + std::to_string(j) + ": " + e.what());
        }
    }
    return result;
}

}  // namespace scs
