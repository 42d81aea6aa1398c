#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "scs/map_em.hpp"
#include "scs/sensing.hpp"
#include "scs/types.hpp"

namespace scs {

/// Row-major grayscale image with real-valued pixels, nominally in [0, 255].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0);

    double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

/// Binary PGM (P5) with maxval 255. Comments in the header are skipped.
GrayImage load_pgm(std::istream& in);
GrayImage load_pgm(const std::filesystem::path& path);
/// Pixels are rounded to the nearest integer and clamped to [0, 255].
void save_pgm(const GrayImage& image, std::ostream& out);
void save_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Square patches of an image. Patch vectors are column-stacked: entry c * edge + r
/// holds pixel (row0 + r, col0 + c).
struct PatchGrid {
    int patch_edge = 8;
    int stride = 8;
    std::vector<std::pair<int, int>> positions;  // (row, col) of each patch's top-left pixel
    std::vector<Vector> patches;
};

/// All patches whose top-left corner lies on multiples of `stride`, in row-major order.
PatchGrid extract_patches(const GrayImage& image, int patch_edge, int stride);

/// Each pixel becomes the mean of the patch values covering it. Throws CoverageError if
/// some pixel is covered by no patch.
GrayImage assemble_patches(const PatchGrid& grid, int width, int height);

/// 10 log10(255^2 / MSE); +infinity when the images are identical.
double psnr(const GrayImage& reference, const GrayImage& estimate);

/// Crops to the largest multiple of patch_edge in each dimension.
GrayImage crop_to_multiple(const GrayImage& image, int patch_edge);

/// Measurements of every non-overlapping tile. Tile p (row-major order) is sensed with
/// make_sensing_matrix(family, M, N, derive_seed(base_seed, p)).
struct SensedImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint16_t patch_edge = 8;
    SensingFamily family = SensingFamily::GaussianIID;
    std::uint16_t m = 0;
    std::uint64_t base_seed = 0;
    std::vector<Vector> measurements;

    int n() const { return static_cast<int>(patch_edge) * patch_edge; }
    SensingMatrix tile_matrix(std::size_t tile) const;
};

/// M = round(rate * N). Images whose dimensions are not multiples of patch_edge are cropped.
SensedImage sense_image(const GrayImage& image, int patch_edge, double rate, SensingFamily family,
                        std::uint64_t seed);

// Container: "SCS1", width:u32, height:u32, patch_edge:u16, family:u8, M:u16, base_seed:u64,
// patch_count:u32, then patch_count * M little-endian f64 in tile order.
void save_sensed(const SensedImage& sensed, std::ostream& out);
SensedImage load_sensed(std::istream& in);
void save_sensed(const SensedImage& sensed, const std::filesystem::path& path);
SensedImage load_sensed(const std::filesystem::path& path);

enum class DecodeMode {
    /// MAP-EM over the sensed tiles, estimates pasted back.
    NonOverlapped,
    /// Pixel-subsampled tiles reread as an inpainting mask; MAP-EM over every sliding
    /// patch, overlapping estimates averaged.
    OverlappedSubsampling,
};

struct DecodeImageOptions {
    int em_iterations = kDefaultEmIterations;
    int gaussians = 19;
    /// Sliding-patch stride in overlapped mode.
    int stride = 1;
    double reg_epsilon = kEmRegEpsilon;
};

struct DecodedImage {
    GrayImage image;
    EmState state;
};

/// Overlapped mode requires the PixelSubsampling family (InvalidArgument otherwise).
DecodedImage decode_image(const SensedImage& sensed, DecodeMode mode, const DecodeImageOptions& options = {});

}  // namespace scs
