#include "scs/analysis.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "scs/decoder.hpp"
#include "scs/errors.hpp"
#include "scs/parallel.hpp"
#include "scs/random.hpp"

namespace scs {

namespace {

/// Accumulates means and the sample covariance of a fixed-size vector of per-trial values.
template <std::size_t K>
struct MomentAccumulator {
    std::array<double, K> sum{};
    std::array<std::array<double, K>, K> cross{};
    double count = 0.0;

    void add(const std::array<double, K>& v) {
        count += 1.0;
        for (std::size_t i = 0; i < K; ++i) {
            sum[i] += v[i];
            for (std::size_t j = 0; j < K; ++j) cross[i][j] += v[i] * v[j];
        }
    }
    double mean(std::size_t i) const { return sum[i] / count; }
    double cov(std::size_t i, std::size_t j) const { return cross[i][j] / count - mean(i) * mean(j); }
    double std_error(std::size_t i) const { return std::sqrt(std::max(0.0, cov(i, i)) / count); }

    /// Delta-method standard error of f(means) given its gradient.
    double delta_std_error(const std::array<double, K>& grad) const {
        double var = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) var += grad[i] * grad[j] * cov(i, j);
        }
        return std::sqrt(std::max(0.0, var) / count);
    }
};

/// Standard error of mean(a) / mean(b) from paired samples.
double ratio_std_error(const MomentAccumulator<2>& acc) {
    const double a = acc.mean(0);
    const double b = acc.mean(1);
    return acc.delta_std_error({1.0 / b, -a / (b * b)});
}

void check_trials(std::int64_t trials) {
    if (trials < 1) throw InvalidArgument("Monte Carlo estimators need trials >= 1");
}

constexpr std::uint64_t kSignalStream = 0;
constexpr std::uint64_t kMatrixStream = 1;
constexpr std::uint64_t kTieStream = 2;

GaussianModel diagonal_model(const Spectrum& spectrum, double reg_epsilon) {
    Matrix cov = spectrum.values().asDiagonal();
    return make_gaussian(std::move(cov), reg_epsilon);
}

Vector draw_signal(const GaussianModel& model, std::uint64_t trial_seed) {
    Rng rng(derive_seed(trial_seed, kSignalStream));
    return sample(model, 1, rng).col(0);
}

ScsRatioReport finish_ratio(const std::vector<double>& errors, const Spectrum& spectrum, Eigen::Index k,
                            Eigen::Index m, std::int64_t trials) {
    MomentAccumulator<1> acc;
    for (double e : errors) acc.add({e});
    const double energy = spectrum.sum();
    ScsRatioReport r;
    r.k = k;
    r.m = m;
    r.trials = trials;
    r.scs_mse = acc.mean(0) / energy;
    r.scs_std_error = acc.std_error(0) / energy;
    r.bestk_mse = spectrum.tail_sum(k) / energy;
    if (r.bestk_mse > 0.0) {
        r.ratio = r.scs_mse / r.bestk_mse;
        r.ratio_std_error = r.scs_std_error / r.bestk_mse;
    } else {
        r.ratio = std::numeric_limits<double>::quiet_NaN();
        r.ratio_std_error = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

}  // namespace

ScsRatioReport scs_vs_bestk_ratio(const Spectrum& spectrum, Eigen::Index k, Eigen::Index m,
                                  SensingFamily family, std::int64_t trials, std::uint64_t seed) {
    check_trials(trials);
    const Eigen::Index n = spectrum.size();
    if (k < 1 || k > n) throw InvalidArgument("scs_vs_bestk_ratio: k must be in [1, N]");
    const GaussianModel model = diagonal_model(spectrum, 0.0);

    std::vector<double> errors(static_cast<std::size_t>(trials));
    parallel_for(errors.size(), [&](std::size_t t) {
        const std::uint64_t trial_seed = derive_seed(seed, t);
        const Vector x = draw_signal(model, trial_seed);
        const SensingMatrix phi = make_sensing_matrix(family, static_cast<int>(m), static_cast<int>(n),
                                                      derive_seed(trial_seed, kMatrixStream));
        errors[t] = (x - map_estimate(model, phi, sense(phi, x))).squaredNorm();
    });
    return finish_ratio(errors, spectrum, k, m, trials);
}

ScsRatioReport scs_vs_bestk_ratio(const Spectrum& spectrum, Eigen::Index k, const SensingMatrix& phi,
                                  std::int64_t trials, std::uint64_t seed) {
    check_trials(trials);
    if (k < 1 || k > spectrum.size()) throw InvalidArgument("scs_vs_bestk_ratio: k must be in [1, N]");
    const GaussianModel model = diagonal_model(spectrum, 0.0);
    const LinearDecoder dec = linear_map_decoder(model, phi);

    std::vector<double> errors(static_cast<std::size_t>(trials));
    parallel_for(errors.size(), [&](std::size_t t) {
        const Vector x = draw_signal(model, derive_seed(seed, t));
        errors[t] = (x - dec.decode(sense(phi, x))).squaredNorm();
    });
    return finish_ratio(errors, spectrum, k, phi.rows(), trials);
}

RipExpectationReport rip_expectation(const GaussianModel& model, SensingFamily family, Eigen::Index k,
                                     Eigen::Index m, std::int64_t trials, std::uint64_t seed) {
    check_trials(trials);
    const Eigen::Index n = model.dimension();
    if (k < 1 || k >= n) throw InvalidArgument("rip_expectation: k must be in [1, N)");

    // Per trial: ||Phi eta_K||^2, ||eta_K||^2, ||Phi eta_Kc||^2, ||eta_Kc||^2.
    std::vector<std::array<double, 4>> samples(static_cast<std::size_t>(trials));
    parallel_for(samples.size(), [&](std::size_t t) {
        const std::uint64_t trial_seed = derive_seed(seed, t);
        const Vector x = draw_signal(model, trial_seed);
        const SensingMatrix phi = make_sensing_matrix(family, static_cast<int>(m), static_cast<int>(n),
                                                      derive_seed(trial_seed, kMatrixStream));
        const Vector eta = x - map_estimate(model, phi, sense(phi, x), 0.0);
        Vector head = Vector::Zero(n);
        head.head(k) = eta.head(k);
        const Vector tail = eta - head;
        samples[t] = {phi.apply(head).squaredNorm(), head.squaredNorm(),
                      phi.apply(tail).squaredNorm(), tail.squaredNorm()};
    });

    MomentAccumulator<4> acc;
    MomentAccumulator<2> null_space;
    for (const auto& s : samples) {
        acc.add(s);
        null_space.add({s[1] + s[3], s[3]});
    }
    const double pk = acc.mean(0), nk = acc.mean(1), pc = acc.mean(2), nc = acc.mean(3);
    if (!(nk > 0.0)) throw UndefinedConstant("rip_expectation: E||eta_K||^2 = 0");
    if (!(nc > 0.0)) throw UndefinedConstant("rip_expectation: E||eta_K^C||^2 = 0");
    if (!(pk > 0.0)) throw UndefinedConstant("rip_expectation: a_K = 0");

    RipExpectationReport r;
    r.k = k;
    r.m = m;
    r.family = family;
    r.trials = trials;
    r.a_K = pk / nk;
    r.b_K = pc / nc;
    r.c0 = 1.0 + r.b_K / r.a_K;
    // c0 = 1 + pc nk / (nc pk)
    r.c0_std_error = acc.delta_std_error(
        {-pc * nk / (nc * pk * pk), pc / (nc * pk), nk / (nc * pk), -pc * nk / (nc * nc * pk)});
    r.residual_head_energy = nk;
    r.residual_tail_energy = nc;
    r.residual_energy = nk + nc;
    r.null_space_ratio = null_space.mean(0) / null_space.mean(1);
    r.null_space_ratio_std_error = ratio_std_error(null_space);
    r.best_k_error = model.spectrum().tail_sum(k);
    return r;
}

double rip_constant_closed_form(const Spectrum& spectrum, const SensingMatrix& phi, const std::vector<int>& support) {
    const Eigen::Index n = spectrum.size();
    if (phi.cols() != n) throw InvalidArgument("rip_constant_closed_form: dimension mismatch");
    Vector mask = Vector::Zero(n);
    for (int i : support) {
        if (i < 0 || i >= n) throw InvalidArgument("rip_constant_closed_form: support index out of range");
        mask[i] = 1.0;
    }
    const GaussianModel model = diagonal_model(spectrum, 0.0);
    const Matrix res = residual_covariance(model, phi, 0.0);
    const Matrix restricted = mask.asDiagonal() * res * mask.asDiagonal();
    const double denominator = restricted.trace();
    if (!(denominator > 1e-12 * spectrum.sum())) {
        throw UndefinedConstant("rip_constant_closed_form: residual energy on the support is zero");
    }
    const Matrix dense = phi.dense();
    const double numerator = (dense * restricted * dense.transpose()).trace();
    return numerator / denominator;
}

double kl_gaussians(const Matrix& sigma1, const Matrix& sigma2) {
    const Eigen::Index n = sigma1.rows();
    if (sigma1.cols() != n || sigma2.rows() != n || sigma2.cols() != n) {
        throw InvalidArgument("kl_gaussians: covariances must be square and of equal size");
    }
    Eigen::LLT<Matrix> llt(sigma2);
    if (llt.info() != Eigen::Success) throw SingularSystem("kl_gaussians: Sigma2 is not positive definite");
    return 0.5 * (llt.solve(sigma1).trace() - static_cast<double>(n));
}

SelectionReport oracle_selection_prob(const GaussianModel& model1, const GaussianModel& model2,
                                      std::int64_t trials, std::uint64_t seed) {
    check_trials(trials);
    if (model1.dimension() != model2.dimension()) throw InvalidArgument("oracle_selection_prob: dimension mismatch");

    std::vector<double> correct(static_cast<std::size_t>(trials));
    parallel_for(correct.size(), [&](std::size_t t) {
        const std::uint64_t trial_seed = derive_seed(seed, t);
        const Vector x = draw_signal(model1, trial_seed);
        const double q1 = model1.mahalanobis_squared(x) + model1.log_det();
        const double q2 = model2.mahalanobis_squared(x) + model2.log_det();
        if (q1 == q2) {
            Rng coin(derive_seed(trial_seed, kTieStream));
            correct[t] = (coin() & 1u) ? 1.0 : 0.0;
        } else {
            correct[t] = q1 < q2 ? 1.0 : 0.0;
        }
    });

    MomentAccumulator<1> acc;
    for (double c : correct) acc.add({c});
    SelectionReport r;
    r.mode = SelectionMode::Oracle;
    r.trials = trials;
    r.m = model1.dimension();
    r.p_correct = acc.mean(0);
    r.p_std_error = acc.std_error(0);
    r.log_det_gap = model1.log_det() - model2.log_det();
    return r;
}

SelectionReport compressed_selection_prob(const GaussianModel& model1, const GaussianModel& model2,
                                          Eigen::Index m, SensingFamily family, std::int64_t trials,
                                          std::uint64_t seed) {
    check_trials(trials);
    const Eigen::Index n = model1.dimension();
    if (model2.dimension() != n) throw InvalidArgument("compressed_selection_prob: dimension mismatch");
    if (m < 1 || m > n) throw InvalidArgument("compressed_selection_prob: M must be in [1, N]");

    std::vector<std::array<double, 2>> samples(static_cast<std::size_t>(trials));
    parallel_for(samples.size(), [&](std::size_t t) {
        const std::uint64_t trial_seed = derive_seed(seed, t);
        const Vector x = draw_signal(model1, trial_seed);
        const SensingMatrix phi = make_sensing_matrix(family, static_cast<int>(m), static_cast<int>(n),
                                                      derive_seed(trial_seed, kMatrixStream));
        const Vector y = sense(phi, x);
        const Vector x1 = map_estimate(model1, phi, y);
        const Vector x2 = map_estimate(model2, phi, y);
        const double s1 = model_score(model1, x1);
        const double s2 = model_score(model2, x2);
        bool pick_first = s1 > s2;
        if (s1 == s2) {
            Rng coin(derive_seed(trial_seed, kTieStream));
            pick_first = (coin() & 1u) != 0;
        }
        samples[t] = {pick_first ? 1.0 : 0.0, (x - (pick_first ? x1 : x2)).squaredNorm()};
    });

    MomentAccumulator<2> acc;
    for (const auto& s : samples) acc.add(s);
    const double energy = model1.covariance().trace() + model1.mean().squaredNorm();
    SelectionReport r;
    r.mode = SelectionMode::Compressed;
    r.trials = trials;
    r.m = m;
    r.p_correct = acc.mean(0);
    r.p_std_error = acc.std_error(0);
    r.mse = acc.mean(1) / energy;
    r.mse_std_error = acc.std_error(1) / energy;
    r.log_det_gap = model1.log_det() - model2.log_det();
    return r;
}

ViolationRate linear_rip_violation_rate(Eigen::Index m, Eigen::Index n, Eigen::Index k, double delta,
                                        std::int64_t trials, std::uint64_t seed) {
    check_trials(trials);
    if (k < 1 || k > n || n % k != 0) throw InvalidArgument("linear_rip_violation_rate: k must divide N");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("linear_rip_violation_rate: delta must be in (0, 1)");
    const Eigen::Index blocks = n / k;

    std::vector<double> violated(static_cast<std::size_t>(trials));
    parallel_for(violated.size(), [&](std::size_t t) {
        const std::uint64_t trial_seed = derive_seed(seed, t);
        Rng rng(derive_seed(trial_seed, kSignalStream));
        std::uniform_int_distribution<Eigen::Index> pick(0, blocks - 1);
        const Eigen::Index block = pick(rng);
        Vector x = Vector::Zero(n);
        x.segment(block * k, k) = standard_normal_vector(k, rng).normalized();
        const SensingMatrix phi = gaussian_matrix(static_cast<int>(m), static_cast<int>(n),
                                                  derive_seed(trial_seed, kMatrixStream));
        const double norm = sense(phi, x).norm();
        violated[t] = (norm < 1.0 - delta || norm > 1.0 + delta) ? 1.0 : 0.0;
    });

    MomentAccumulator<1> acc;
    for (double v : violated) acc.add({v});
    return {acc.mean(0), acc.std_error(0), trials};
}

}  // namespace scs
