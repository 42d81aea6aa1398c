#include "scs/map_em.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "scs/errors.hpp"
#include "scs/parallel.hpp"
#include "scs/random.hpp"

namespace scs {

namespace {

// Width (pixels) of the Gaussian blur applied to synthetic step edges.
constexpr double kEdgeSmoothing = 0.5;

Matrix floor_covariance(const Matrix& cov, double reg_epsilon) {
    const GaussianModel raw = make_gaussian(cov, 0.0);
    double floor = reg_epsilon * raw.spectrum().sum() / static_cast<double>(cov.rows());
    if (floor <= 0.0) floor = reg_epsilon;
    const Vector floored = raw.spectrum().values().cwiseMax(floor);
    Matrix out = raw.pca_basis() * floored.asDiagonal() * raw.pca_basis().transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace

Vector edge_profile_direction(int patch_edge, double theta) {
    const double center = 0.5 * (patch_edge - 1);
    const double nx = -std::sin(theta);
    const double ny = std::cos(theta);
    Vector v(patch_edge * patch_edge);
    for (int c = 0; c < patch_edge; ++c) {
        for (int r = 0; r < patch_edge; ++r) v[c * patch_edge + r] = (c - center) * nx + (r - center) * ny;
    }
    return v.normalized();
}

Gmm init_directional_gmm(int patch_edge, int j, int samples_per_model, std::uint64_t seed, double reg_epsilon) {
    if (patch_edge < 2) throw InvalidArgument("init_directional_gmm: patch_edge must be >= 2");
    if (j < 2) throw InvalidArgument("init_directional_gmm: J must be >= 2");
    if (samples_per_model < 1) throw InvalidArgument("init_directional_gmm: need at least one sample");
    const int n = patch_edge * patch_edge;
    const double center = 0.5 * (patch_edge - 1);
    const double half_extent = 0.5 * patch_edge;

    std::vector<Matrix> covariances(static_cast<std::size_t>(j - 1));
    parallel_for(covariances.size(), [&](std::size_t d) {
        const double theta = static_cast<double>(d) * std::numbers::pi / static_cast<double>(j - 1);
        // Unit normal to an edge running along angle theta.
        const double nx = -std::sin(theta);
        const double ny = std::cos(theta);
        Rng rng(derive_seed(seed, d));
        std::uniform_real_distribution<double> offset(-half_extent, half_extent);
        std::bernoulli_distribution polarity(0.5);
        Matrix second_moment = Matrix::Zero(n, n);
        Vector patch(n);
        for (int s = 0; s < samples_per_model; ++s) {
            const double shift = offset(rng);
            const double sign = polarity(rng) ? 0.5 : -0.5;
            for (int c = 0; c < patch_edge; ++c) {
                for (int r = 0; r < patch_edge; ++r) {
                    const double dist = (c - center) * nx + (r - center) * ny - shift;
                    patch[c * patch_edge + r] = sign * std::erf(dist / (std::numbers::sqrt2 * kEdgeSmoothing));
                }
            }
            patch.array() -= patch.mean();
            second_moment.selfadjointView<Eigen::Lower>().rankUpdate(patch);
        }
        Matrix cov = second_moment.selfadjointView<Eigen::Lower>();
        covariances[d] = cov / static_cast<double>(samples_per_model);
    });

    double mean_trace = 0.0;
    for (const auto& c : covariances) mean_trace += c.trace();
    mean_trace /= static_cast<double>(covariances.size());

    std::vector<GaussianModel> models;
    models.reserve(static_cast<std::size_t>(j));
    for (const auto& c : covariances) models.push_back(make_gaussian(floor_covariance(c, reg_epsilon), reg_epsilon));
    models.push_back(make_gaussian(Matrix::Identity(n, n) * (mean_trace / n), reg_epsilon));
    return Gmm(std::move(models));
}

Gmm adapt_to_measurements(const Gmm& init, const std::vector<Measurement>& measurements, double reg_epsilon) {
    if (measurements.empty()) throw InvalidArgument("adapt_to_measurements: no measurements");
    const Eigen::Index n = init.dimension();
    const Vector ones = Vector::Ones(n);
    double cross = 0.0;
    double norm = 0.0;
    for (const auto& m : measurements) {
        if (m.phi.cols() != n || m.phi.rows() != m.y.size()) throw InvalidArgument("adapt_to_measurements: dimension mismatch");
        const Vector d = m.phi.apply(ones);
        cross += d.dot(m.y);
        norm += d.squaredNorm();
    }
    const double level = norm > 0.0 ? cross / norm : 0.0;

    // Method of moments on the centred measurements r_i = y_i - level * Phi_i 1, with
    // u_i = Phi_i 1: fit Sigma' = s * Sigma + d * 1 1^T / N to E|r|^2 and E(u^T r)^2.
    double total_energy = 0.0;
    double total_dc = 0.0;
    double dc_energy_basis = 0.0;
    double dc_dc_basis = 0.0;
    std::vector<Vector> dc_dirs;
    dc_dirs.reserve(measurements.size());
    for (const auto& m : measurements) {
        Vector u = m.phi.apply(ones);
        const Vector r = m.y - level * u;
        total_energy += r.squaredNorm();
        const double ur = u.dot(r);
        total_dc += ur * ur;
        const double uu = u.squaredNorm();
        dc_energy_basis += uu / static_cast<double>(n);
        dc_dc_basis += uu * uu / static_cast<double>(n);
        dc_dirs.push_back(std::move(u));
    }

    std::vector<GaussianModel> models;
    models.reserve(init.size());
    for (const auto& model : init) {
        const Matrix& cov = model.covariance();
        double energy_basis = 0.0;
        double dc_basis = 0.0;
        for (std::size_t i = 0; i < measurements.size(); ++i) {
            const auto& m = measurements[i];
            if (m.phi.is_coordinate_selection()) {
                const auto& rows = m.phi.selected_rows();
                for (int r : rows) energy_basis += cov(r, r);
                double q = 0.0;
                for (int a : rows) for (int b : rows) q += cov(a, b);
                dc_basis += q;
            } else {
                const Matrix& phi = m.phi.matrix();
                const Matrix pc = phi * cov;
                energy_basis += pc.cwiseProduct(phi).sum();
                const Vector w = phi.transpose() * dc_dirs[i];
                dc_basis += w.dot(cov * w);
            }
        }
        double scale = 1.0;
        double dc_var = 0.0;
        const double det = energy_basis * dc_dc_basis - dc_energy_basis * dc_basis;
        if (std::abs(det) > 1e-12 * std::abs(energy_basis * dc_dc_basis)) {
            scale = (total_energy * dc_dc_basis - dc_energy_basis * total_dc) / det;
            dc_var = (energy_basis * total_dc - dc_basis * total_energy) / det;
        }
        if (!(scale > 0.0) || dc_var < 0.0) {
            dc_var = 0.0;
            scale = energy_basis > 0.0 && total_energy > 0.0 ? total_energy / energy_basis : 1.0;
        }
        Matrix adapted = cov * scale;
        adapted.array() += dc_var / static_cast<double>(n);
        models.push_back(make_gaussian(Vector::Constant(n, level), adapted, reg_epsilon));
    }
    return Gmm(std::move(models));
}

EStepResult e_step(const Gmm& gmm, const std::vector<Measurement>& measurements, double reg_epsilon) {
    EStepResult out;
    out.assignments.resize(measurements.size());
    out.estimates.resize(measurements.size());
    std::vector<double> best(measurements.size());
    parallel_for(measurements.size(), [&](std::size_t i) {
        try {
            DecodeResult d = gmm_decode(gmm, measurements[i].phi, measurements[i].y, reg_epsilon);
            out.assignments[i] = d.selected_model;
            best[i] = d.scores[static_cast<std::size_t>(d.selected_model)];
            out.estimates[i] = std::move(d.estimate);
        } catch (const SingularSystem& e) {
            throw SingularSystem("signal " + std::to_string(i) + ", " + e.what());
        }
    });
    for (double b : best) out.objective += b;
    return out;
}

Gmm m_step(const std::vector<Vector>& estimates, const std::vector<int>& assignments, const Gmm& previous,
           double reg_epsilon, int min_cluster) {
    if (estimates.size() != assignments.size()) throw InvalidArgument("m_step: estimates and assignments differ in length");
    const std::size_t j_count = previous.size();
    const Eigen::Index n = previous.dimension();

    std::vector<Vector> sums(j_count, Vector::Zero(n));
    std::vector<std::size_t> counts(j_count, 0);
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const int a = assignments[i];
        if (a < 0 || static_cast<std::size_t>(a) >= j_count) throw InvalidArgument("m_step: assignment out of range");
        if (estimates[i].size() != n) throw InvalidArgument("m_step: estimate dimension mismatch");
        sums[static_cast<std::size_t>(a)] += estimates[i];
        ++counts[static_cast<std::size_t>(a)];
    }

    std::vector<Vector> means(j_count);
    std::vector<Matrix> scatter(j_count, Matrix::Zero(n, n));
    for (std::size_t j = 0; j < j_count; ++j) {
        if (counts[j] > 0) means[j] = sums[j] / static_cast<double>(counts[j]);
    }
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const auto a = static_cast<std::size_t>(assignments[i]);
        scatter[a].selfadjointView<Eigen::Lower>().rankUpdate(estimates[i] - means[a]);
    }

    std::vector<GaussianModel> models;
    models.reserve(j_count);
    for (std::size_t j = 0; j < j_count; ++j) {
        if (counts[j] < static_cast<std::size_t>(std::max(min_cluster, 1))) {
            models.push_back(previous[j]);
            continue;
        }
        Matrix cov = scatter[j].selfadjointView<Eigen::Lower>();
        cov /= static_cast<double>(counts[j]);
        models.push_back(make_gaussian(means[j], floor_covariance(cov, reg_epsilon), reg_epsilon));
    }
    return Gmm(std::move(models));
}

EmState map_em_decode(const std::vector<Measurement>& measurements, const Gmm& init, int iterations,
                      double reg_epsilon, int min_cluster) {
    if (iterations < 1) throw InvalidArgument("map_em_decode: iterations must be >= 1");
    if (measurements.empty()) throw InvalidArgument("map_em_decode: no measurements");
    EmState state{init, {}, {}, {}};
    for (int it = 0; it < iterations; ++it) {
        EStepResult e = e_step(state.gmm, measurements, reg_epsilon);
        state.objective_trace.push_back(e.objective);
        state.gmm = m_step(e.estimates, e.assignments, state.gmm, reg_epsilon, min_cluster);
    }
    EStepResult last = e_step(state.gmm, measurements, reg_epsilon);
    state.objective_trace.push_back(last.objective);
    state.assignments = std::move(last.assignments);
    state.estimates = std::move(last.estimates);
    return state;
}

void save_em_state(const EmState& state, const std::filesystem::path& prefix) {
    save_gmm(state.gmm, std::filesystem::path(prefix.string() + ".gmm"));
    {
        std::ofstream out(prefix.string() + "_objective.csv");
        if (!out) throw IoError("cannot write objective trace for " + prefix.string());
        out << "iteration,objective\n";
        out.precision(17);
        for (std::size_t i = 0; i < state.objective_trace.size(); ++i) out << i << ',' << state.objective_trace[i] << '\n';
    }
    std::ofstream out(prefix.string() + "_assignments.csv");
    if (!out) throw IoError("cannot write assignments for " + prefix.string());
    out << "signal,model\n";
    for (std::size_t i = 0; i < state.assignments.size(); ++i) out << i << ',' << state.assignments[i] << '\n';
}

}  // namespace scs
