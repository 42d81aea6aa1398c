#include "scs/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "scs/errors.hpp"
#include "scs/random.hpp"

namespace scs {

namespace {

void check_dims(int m, int n) {
    if (m < 1 || n < 1 || m > n) {
        throw InvalidArgument("sensing matrix requires 1 <= M <= N (got M=" + std::to_string(m) +
                              ", N=" + std::to_string(n) + ")");
    }
}

std::vector<int> draw_distinct_rows(int m, int n, Rng& rng) {
    // Partial Fisher-Yates.
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < m; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(m));
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

std::string_view to_string(SensingFamily family) {
    switch (family) {
        case SensingFamily::GaussianIID: return "gaussian";
        case SensingFamily::BernoulliIID: return "bernoulli";
        case SensingFamily::SubsamplingDCT: return "subsample";
        case SensingFamily::PixelSubsampling: return "pixel";
    }
    return "unknown";
}

std::optional<SensingFamily> parse_family(std::string_view name) {
    if (name == "gaussian") return SensingFamily::GaussianIID;
    if (name == "bernoulli") return SensingFamily::BernoulliIID;
    if (name == "subsample") return SensingFamily::SubsamplingDCT;
    if (name == "pixel") return SensingFamily::PixelSubsampling;
    return std::nullopt;
}

SensingMatrix SensingMatrix::from_matrix(Matrix matrix) {
    if (matrix.rows() < 1 || matrix.cols() < 1) throw InvalidArgument("from_matrix: empty matrix");
    SensingMatrix phi;
    phi.matrix_ = std::move(matrix);
    phi.rows_ = phi.matrix_.rows();
    phi.cols_ = phi.matrix_.cols();
    return phi;
}

SensingMatrix SensingMatrix::from_selection(std::vector<int> rows, Eigen::Index n) {
    if (rows.empty() || static_cast<Eigen::Index>(rows.size()) > n) {
        throw InvalidArgument("from_selection: need 1 <= M <= N selected rows");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= n || (i > 0 && rows[i] <= rows[i - 1])) {
            throw InvalidArgument("from_selection: rows must be distinct, ascending and inside [0, N)");
        }
    }
    SensingMatrix phi;
    phi.family_ = SensingFamily::PixelSubsampling;
    phi.rows_ = static_cast<Eigen::Index>(rows.size());
    phi.cols_ = n;
    phi.selected_ = std::move(rows);
    return phi;
}

Matrix SensingMatrix::dense() const {
    if (matrix_.size() > 0 || !is_coordinate_selection()) return matrix_;
    Matrix d = Matrix::Zero(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i) d(i, selected_[static_cast<std::size_t>(i)]) = 1.0;
    return d;
}

Vector SensingMatrix::apply(const Vector& x) const {
    if (x.size() != cols_) throw InvalidArgument("sensing: signal dimension does not match N");
    if (is_coordinate_selection()) {
        Vector y(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) y[i] = x[selected_[static_cast<std::size_t>(i)]];
        return y;
    }
    return matrix_ * x;
}

Matrix dct_matrix(int n) {
    if (n < 1) throw InvalidArgument("dct_matrix: N must be >= 1");
    Matrix d(n, n);
    const double norm = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k) {
        const double ck = (k == 0) ? 1.0 / std::numbers::sqrt2 : 1.0;
        for (int j = 0; j < n; ++j) {
            d(k, j) = norm * ck * std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
        }
    }
    return d;
}

SensingMatrix make_sensing_matrix(SensingFamily family, int m, int n, std::uint64_t seed) {
    check_dims(m, n);
    Rng rng(seed);
    SensingMatrix phi;
    phi.family_ = family;
    phi.seed_ = seed;
    phi.rows_ = m;
    phi.cols_ = n;
    phi.regenerable_ = true;
    switch (family) {
        case SensingFamily::GaussianIID: {
            std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
            phi.matrix_.resize(m, n);
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < n; ++c) phi.matrix_(r, c) = normal(rng);
            }
            break;
        }
        case SensingFamily::BernoulliIID: {
            std::bernoulli_distribution coin(0.5);
            const double amp = 1.0 / std::sqrt(static_cast<double>(m));
            phi.matrix_.resize(m, n);
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < n; ++c) phi.matrix_(r, c) = coin(rng) ? amp : -amp;
            }
            break;
        }
        case SensingFamily::SubsamplingDCT: {
            phi.selected_ = draw_distinct_rows(m, n, rng);
            const Matrix dct = dct_matrix(n);
            phi.matrix_.resize(m, n);
            for (int r = 0; r < m; ++r) phi.matrix_.row(r) = dct.row(phi.selected_[static_cast<std::size_t>(r)]);
            break;
        }
        case SensingFamily::PixelSubsampling: {
            phi.selected_ = draw_distinct_rows(m, n, rng);
            phi.matrix_ = Matrix::Zero(m, n);
            for (int r = 0; r < m; ++r) phi.matrix_(r, phi.selected_[static_cast<std::size_t>(r)]) = 1.0;
            break;
        }
        default:
            throw InvalidArgument("unknown sensing family");
    }
    return phi;
}

SensingMatrix gaussian_matrix(int m, int n, std::uint64_t seed) {
    return make_sensing_matrix(SensingFamily::GaussianIID, m, n, seed);
}
SensingMatrix bernoulli_matrix(int m, int n, std::uint64_t seed) {
    return make_sensing_matrix(SensingFamily::BernoulliIID, m, n, seed);
}
SensingMatrix subsampling_dct_matrix(int m, int n, std::uint64_t seed) {
    return make_sensing_matrix(SensingFamily::SubsamplingDCT, m, n, seed);
}
SensingMatrix pixel_subsampling_matrix(int m, int n, std::uint64_t seed) {
    return make_sensing_matrix(SensingFamily::PixelSubsampling, m, n, seed);
}

Vector sense(const SensingMatrix& phi, const Vector& x) { return phi.apply(x); }

std::array<std::uint8_t, 24> serialize(const SensingMatrix& phi) {
    if (!phi.regenerable()) throw InvalidArgument("serialize: operator was not built by a seeded generator");
    std::array<std::uint8_t, 24> out{};
    auto put = [&out](std::size_t offset, std::uint64_t v, std::size_t width) {
        for (std::size_t i = 0; i < width; ++i) out[offset + i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu);
    };
    put(0, static_cast<std::uint64_t>(phi.family()), 4);
    put(4, static_cast<std::uint64_t>(phi.rows()), 4);
    put(8, static_cast<std::uint64_t>(phi.cols()), 4);
    put(12, 0, 4);
    put(16, phi.seed(), 8);
    return out;
}

SensingMatrix deserialize_sensing(const std::array<std::uint8_t, 24>& bytes) {
    auto get = [&bytes](std::size_t offset, std::size_t width) {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
        return v;
    };
    const auto family = get(0, 4);
    if (family > static_cast<std::uint64_t>(SensingFamily::PixelSubsampling) || get(12, 4) != 0) {
        throw ParseError("sensing record: unknown family or non-zero reserved field");
    }
    return make_sensing_matrix(static_cast<SensingFamily>(family), static_cast<int>(get(4, 4)),
                               static_cast<int>(get(8, 4)), get(16, 8));
}

}  // namespace scs
