#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "scs/types.hpp"

namespace scs {

enum class SensingFamily : std::uint8_t {
    GaussianIID = 0,
    BernoulliIID = 1,
    /// M distinct rows of the orthonormal N-point DCT-II.
    SubsamplingDCT = 2,
    /// M distinct rows of the identity: keeps M of the N pixels of a patch.
    PixelSubsampling = 3,
};

std::string_view to_string(SensingFamily family);
/// Accepts "gaussian", "bernoulli", "subsample" (DCT) and "pixel".
std::optional<SensingFamily> parse_family(std::string_view name);

/// Dense M x N measurement operator. Random families are pure functions of (M, N, seed).
class SensingMatrix {
public:
    /// Dense form. Left empty for operators built by from_selection, which only keep
    /// their row indices; use apply() or dense() when the operator may be one of those.
    const Matrix& matrix() const { return matrix_; }
    /// Materialized dense form for any operator.
    Matrix dense() const;
    /// Phi x.
    Vector apply(const Vector& x) const;

    SensingFamily family() const { return family_; }
    std::uint64_t seed() const { return seed_; }
    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    /// Row indices picked by the subsampling families, ascending; empty otherwise.
    const std::vector<int>& selected_rows() const { return selected_; }
    /// True when every row is a canonical basis vector (PixelSubsampling).
    bool is_coordinate_selection() const { return family_ == SensingFamily::PixelSubsampling; }
    /// True when the operator came from a seeded generator and can be rebuilt from (family, M, N, seed).
    bool regenerable() const { return regenerable_; }

    /// Wraps an arbitrary matrix (tests, deterministic constructions). Family is
    /// reported as GaussianIID with seed 0; such matrices cannot be serialized.
    static SensingMatrix from_matrix(Matrix matrix);
    /// Coordinate selection keeping `rows` (distinct, ascending) out of n. Stores only
    /// the indices, so large collections of per-patch masks stay small.
    static SensingMatrix from_selection(std::vector<int> rows, Eigen::Index n);

private:
    friend SensingMatrix make_sensing_matrix(SensingFamily, int, int, std::uint64_t);

    Matrix matrix_;
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    SensingFamily family_ = SensingFamily::GaussianIID;
    std::uint64_t seed_ = 0;
    std::vector<int> selected_;
    bool regenerable_ = false;
};

/// Entries i.i.d. N(0, 1/M).
SensingMatrix gaussian_matrix(int m, int n, std::uint64_t seed);
/// Entries i.i.d. +-1/sqrt(M) with equal probability.
SensingMatrix bernoulli_matrix(int m, int n, std::uint64_t seed);
/// M distinct rows, drawn uniformly without replacement, of the orthonormal DCT-II.
SensingMatrix subsampling_dct_matrix(int m, int n, std::uint64_t seed);
/// M distinct rows of the N x N identity.
SensingMatrix pixel_subsampling_matrix(int m, int n, std::uint64_t seed);
SensingMatrix make_sensing_matrix(SensingFamily family, int m, int n, std::uint64_t seed);

/// Orthonormal DCT-II: row k is sqrt(2/N) c_k cos(pi (2n+1) k / 2N), c_0 = 1/sqrt(2).
Matrix dct_matrix(int n);

Vector sense(const SensingMatrix& phi, const Vector& x);

/// 24-byte record {family:u32, M:u32, N:u32, reserved:u32 = 0, seed:u64}, little-endian.
/// The matrix itself is regenerated on load.
std::array<std::uint8_t, 24> serialize(const SensingMatrix& phi);
SensingMatrix deserialize_sensing(const std::array<std::uint8_t, 24>& bytes);

}  // namespace scs
