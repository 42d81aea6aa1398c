#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "scs/decoder.hpp"
#include "scs/gaussian_model.hpp"
#include "scs/sensing.hpp"
#include "scs/types.hpp"

namespace scs {

/// One sensed signal y = Phi x.
struct Measurement {
    SensingMatrix phi;
    Vector y;
};

/// Hard-assignment MAP-EM state.
struct EmState {
    Gmm gmm;
    std::vector<int> assignments;
    std::vector<Vector> estimates;
    /// Sum over signals of the selected model's log a-posteriori score, one entry per E-step.
    std::vector<double> objective_trace;
};

struct EStepResult {
    std::vector<int> assignments;
    std::vector<Vector> estimates;
    double objective = 0.0;
};

/// Default number of synthetic edge patches per directional model.
inline constexpr int kDirectionalSamples = 2000;
inline constexpr std::uint64_t kDirectionalSeed = 0x5eed0f1e1dULL;

/// Unit-norm linear ramp across an edge at angle theta (radians, from the column axis),
/// in the column-stacked patch layout. This is the dominant principal direction of a
/// step edge with a random position.
Vector edge_profile_direction(int patch_edge, double theta);

/// J - 1 directional models (edge angles j * 180 / (J - 1) degrees) learned from
/// synthetic smoothed step edges, plus one isotropic model. All means are zero.
Gmm init_directional_gmm(int patch_edge, int j, int samples_per_model = kDirectionalSamples,
                         std::uint64_t seed = kDirectionalSeed, double reg_epsilon = kEmRegEpsilon);

/// Fits the initial models to the data: every mean becomes c * 1, with c the least-squares
/// constant signal for all measurements, and each covariance is rescaled so that its expected
/// measurement energy matches the energy left after removing the constant.
Gmm adapt_to_measurements(const Gmm& init, const std::vector<Measurement>& measurements,
                          double reg_epsilon = kEmRegEpsilon);

/// Piecewise-linear decode of every signal; SingularSystem messages name the signal.
EStepResult e_step(const Gmm& gmm, const std::vector<Measurement>& measurements,
                   double reg_epsilon = kEmRegEpsilon);

/// Empirical (1/|C_j|-normalized) mean and covariance per cluster, eigenvalues floored
/// at reg * Tr / N. Clusters with fewer than `min_cluster` members keep `previous[j]`.
Gmm m_step(const std::vector<Vector>& estimates, const std::vector<int>& assignments, const Gmm& previous,
           double reg_epsilon = kEmRegEpsilon, int min_cluster = 2);

inline constexpr int kDefaultEmIterations = 3;

/// `iterations` rounds of E-step + M-step, then a final E-step.
EmState map_em_decode(const std::vector<Measurement>& measurements, const Gmm& init,
                      int iterations = kDefaultEmIterations, double reg_epsilon = kEmRegEpsilon,
                      int min_cluster = 2);

/// Writes <prefix>.gmm, <prefix>_objective.csv and <prefix>_assignments.csv.
void save_em_state(const EmState& state, const std::filesystem::path& prefix);

}  // namespace scs
