#include "scs/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "scs/binary_io.hpp"
#include "scs/errors.hpp"
#include "scs/random.hpp"

namespace scs {

namespace {

int read_header_int(std::istream& in, const char* what) {
    // Skip whitespace and '#' comments.
    for (;;) {
        const int c = in.peek();
        if (c == EOF) throw ParseError(std::string("PGM header ended before ") + what);
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else {
            break;
        }
    }
    if (!std::isdigit(in.peek())) throw ParseError(std::string("PGM header: malformed ") + what);
    long value = 0;
    while (std::isdigit(in.peek())) {
        value = value * 10 + (in.get() - '0');
        if (value > std::numeric_limits<int>::max()) throw ParseError(std::string("PGM header: ") + what + " too large");
    }
    return static_cast<int>(value);
}

Vector read_patch(const GrayImage& image, int row, int col, int edge) {
    Vector v(edge * edge);
    for (int c = 0; c < edge; ++c) {
        for (int r = 0; r < edge; ++r) v[c * edge + r] = image.at(row + r, col + c);
    }
    return v;
}

void quantize_pixels(GrayImage& image) {
    for (double& p : image.pixels) p = std::round(std::clamp(p, 0.0, 255.0));
}

// Smallest correction putting x back on {x : Phi x = y}.
Vector enforce_measurements(const Measurement& m, Vector x) {
    const Vector r = m.y - m.phi.apply(x);
    if (m.phi.is_coordinate_selection()) {
        const auto& rows = m.phi.selected_rows();
        for (std::size_t i = 0; i < rows.size(); ++i) x[rows[i]] += r[static_cast<Eigen::Index>(i)];
        return x;
    }
    const Matrix& phi = m.phi.matrix();
    const Eigen::LLT<Matrix> llt(phi * phi.transpose());
    if (llt.info() != Eigen::Success) return x;
    return x + phi.transpose() * llt.solve(r);
}

}  // namespace

GrayImage::GrayImage(int w, int h, double fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw InvalidArgument("GrayImage: dimensions must be positive");
    pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

GrayImage load_pgm(std::istream& in) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2) throw TruncatedData("PGM: missing magic number");
    if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '1' || magic[1] == '3' || magic[1] == '4' ||
                            magic[1] == '6')) {
        throw UnsupportedFormat(std::string("PGM: only binary P5 is supported, got ") + magic[0] + magic[1]);
    }
    if (magic[0] != 'P' || magic[1] != '5') throw ParseError("PGM: wrong magic number");
    const int width = read_header_int(in, "width");
    const int height = read_header_int(in, "height");
    const int maxval = read_header_int(in, "maxval");
    if (width < 1 || height < 1) throw ParseError("PGM header: zero image dimension");
    if (maxval != 255) throw UnsupportedFormat("PGM: only maxval 255 is supported");
    if (!std::isspace(in.get())) throw ParseError("PGM header: missing whitespace before raster");

    GrayImage image(width, height);
    std::string raw(image.pixels.size(), '\0');
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw TruncatedData("PGM: truncated pixel data");
    for (std::size_t i = 0; i < raw.size(); ++i) image.pixels[i] = static_cast<unsigned char>(raw[i]);
    return image;
}

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load_pgm(in);
}

void save_pgm(const GrayImage& image, std::ostream& out) {
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    std::string raw(image.pixels.size(), '\0');
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(image.pixels[i]), 0L, 255L)));
    }
    out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("PGM: write failed");
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    save_pgm(image, out);
}

PatchGrid extract_patches(const GrayImage& image, int patch_edge, int stride) {
    if (patch_edge < 1 || stride < 1) throw InvalidArgument("extract_patches: patch_edge and stride must be >= 1");
    if (patch_edge > image.width || patch_edge > image.height) {
        throw InvalidArgument("extract_patches: patch larger than the image");
    }
    PatchGrid grid;
    grid.patch_edge = patch_edge;
    grid.stride = stride;
    for (int r = 0; r + patch_edge <= image.height; r += stride) {
        for (int c = 0; c + patch_edge <= image.width; c += stride) {
            grid.positions.emplace_back(r, c);
            grid.patches.push_back(read_patch(image, r, c, patch_edge));
        }
    }
    return grid;
}

GrayImage assemble_patches(const PatchGrid& grid, int width, int height) {
    if (grid.positions.size() != grid.patches.size()) throw InvalidArgument("assemble_patches: positions/patches mismatch");
    const int edge = grid.patch_edge;
    GrayImage sum(width, height);
    std::vector<int> count(sum.pixels.size(), 0);
    for (std::size_t p = 0; p < grid.patches.size(); ++p) {
        const auto [row, col] = grid.positions[p];
        if (row < 0 || col < 0 || row + edge > height || col + edge > width) {
            throw InvalidArgument("assemble_patches: patch outside the image");
        }
        const Vector& v = grid.patches[p];
        for (int c = 0; c < edge; ++c) {
            for (int r = 0; r < edge; ++r) {
                sum.at(row + r, col + c) += v[c * edge + r];
                ++count[static_cast<std::size_t>(row + r) * width + col + c];
            }
        }
    }
    for (std::size_t i = 0; i < count.size(); ++i) {
        if (count[i] == 0) {
            throw CoverageError("assemble_patches: pixel (" + std::to_string(i / width) + ", " +
                                std::to_string(i % width) + ") is not covered by any patch");
        }
        sum.pixels[i] /= count[i];
    }
    return sum;
}

double psnr(const GrayImage& reference, const GrayImage& estimate) {
    if (reference.width != estimate.width || reference.height != estimate.height) {
        throw InvalidArgument("psnr: image dimensions differ");
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
        const double d = reference.pixels[i] - estimate.pixels[i];
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(reference.pixels.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

GrayImage crop_to_multiple(const GrayImage& image, int patch_edge) {
    const int w = image.width - image.width % patch_edge;
    const int h = image.height - image.height % patch_edge;
    if (w < patch_edge || h < patch_edge) throw InvalidArgument("crop_to_multiple: image smaller than one patch");
    if (w == image.width && h == image.height) return image;
    GrayImage out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) out.at(r, c) = image.at(r, c);
    }
    return out;
}

SensingMatrix SensedImage::tile_matrix(std::size_t tile) const {
    return make_sensing_matrix(family, m, n(), derive_seed(base_seed, tile));
}

SensedImage sense_image(const GrayImage& input, int patch_edge, double rate, SensingFamily family,
                        std::uint64_t seed) {
    if (patch_edge < 1 || patch_edge > 255) throw InvalidArgument("sense_image: patch_edge out of range");
    const int n = patch_edge * patch_edge;
    if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("sense_image: rate must be in (0, 1]");
    const int m = std::clamp(static_cast<int>(std::lround(rate * n)), 1, n);
    const GrayImage image = crop_to_multiple(input, patch_edge);

    SensedImage sensed;
    sensed.width = static_cast<std::uint32_t>(image.width);
    sensed.height = static_cast<std::uint32_t>(image.height);
    sensed.patch_edge = static_cast<std::uint16_t>(patch_edge);
    sensed.family = family;
    sensed.m = static_cast<std::uint16_t>(m);
    sensed.base_seed = seed;
    const PatchGrid tiles = extract_patches(image, patch_edge, patch_edge);
    sensed.measurements.reserve(tiles.patches.size());
    for (std::size_t p = 0; p < tiles.patches.size(); ++p) {
        sensed.measurements.push_back(sensed.tile_matrix(p).apply(tiles.patches[p]));
    }
    return sensed;
}

void save_sensed(const SensedImage& sensed, std::ostream& out) {
    io::write_magic(out, "SCS1");
    io::write_u32(out, sensed.width);
    io::write_u32(out, sensed.height);
    io::write_u16(out, sensed.patch_edge);
    io::write_u8(out, static_cast<std::uint8_t>(sensed.family));
    io::write_u16(out, sensed.m);
    io::write_u64(out, sensed.base_seed);
    io::write_u32(out, static_cast<std::uint32_t>(sensed.measurements.size()));
    for (const auto& y : sensed.measurements) {
        if (y.size() != sensed.m) throw InvalidArgument("save_sensed: measurement length differs from M");
        for (Eigen::Index i = 0; i < y.size(); ++i) io::write_f64(out, y[i]);
    }
    if (!out) throw IoError("save_sensed: write failed");
}

SensedImage load_sensed(std::istream& in) {
    io::expect_magic(in, "SCS1");
    SensedImage s;
    s.width = io::read_u32(in, "width");
    s.height = io::read_u32(in, "height");
    s.patch_edge = io::read_u16(in, "patch_edge");
    const auto family = io::read_u8(in, "family");
    if (family > static_cast<std::uint8_t>(SensingFamily::PixelSubsampling)) throw ParseError("sensed container: unknown family");
    s.family = static_cast<SensingFamily>(family);
    s.m = io::read_u16(in, "M");
    s.base_seed = io::read_u64(in, "base_seed");
    const auto count = io::read_u32(in, "patch_count");
    if (s.patch_edge == 0 || s.m == 0 || s.m > s.n()) throw ParseError("sensed container: invalid patch_edge or M");
    if (s.width % s.patch_edge != 0 || s.height % s.patch_edge != 0 ||
        static_cast<std::uint64_t>(count) != static_cast<std::uint64_t>(s.width / s.patch_edge) * (s.height / s.patch_edge)) {
        throw ParseError("sensed container: patch count does not match the image geometry");
    }
    s.measurements.resize(count);
    for (auto& y : s.measurements) {
        y.resize(s.m);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = io::read_f64(in, "measurements");
    }
    return s;
}

void save_sensed(const SensedImage& sensed, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    save_sensed(sensed, out);
}

SensedImage load_sensed(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load_sensed(in);
}

DecodedImage decode_image(const SensedImage& sensed, DecodeMode mode, const DecodeImageOptions& options) {
    const int edge = sensed.patch_edge;
    const int width = static_cast<int>(sensed.width);
    const int height = static_cast<int>(sensed.height);
    const int n = sensed.n();
    const int tiles_per_row = width / edge;
    const Gmm init = init_directional_gmm(edge, options.gaussians, kDirectionalSamples, kDirectionalSeed,
                                          options.reg_epsilon);

    if (mode == DecodeMode::NonOverlapped) {
        std::vector<Measurement> measurements;
        measurements.reserve(sensed.measurements.size());
        for (std::size_t p = 0; p < sensed.measurements.size(); ++p) {
            measurements.push_back({sensed.tile_matrix(p), sensed.measurements[p]});
        }
        const Gmm start = adapt_to_measurements(init, measurements, options.reg_epsilon);
        EmState state = map_em_decode(measurements, start, options.em_iterations, options.reg_epsilon);
        PatchGrid grid;
        grid.patch_edge = edge;
        grid.stride = edge;
        for (std::size_t p = 0; p < measurements.size(); ++p) {
            grid.positions.emplace_back(static_cast<int>(p) / tiles_per_row * edge, static_cast<int>(p) % tiles_per_row * edge);
        }
        grid.patches.reserve(measurements.size());
        for (std::size_t p = 0; p < measurements.size(); ++p) {
            grid.patches.push_back(enforce_measurements(measurements[p], state.estimates[p]));
        }
        GrayImage image = assemble_patches(grid, width, height);
        quantize_pixels(image);
        return {std::move(image), std::move(state)};
    }

    if (sensed.family != SensingFamily::PixelSubsampling) {
        throw InvalidArgument("decode_image: overlapped reconstruction requires pixel subsampling");
    }
    if (options.stride < 1 || options.stride > edge) throw InvalidArgument("decode_image: stride must be in [1, patch_edge]");

    // Known-pixel map rebuilt from the tile masks.
    GrayImage known(width, height);
    std::vector<char> mask(known.pixels.size(), 0);
    for (std::size_t p = 0; p < sensed.measurements.size(); ++p) {
        const int row0 = static_cast<int>(p) / tiles_per_row * edge;
        const int col0 = static_cast<int>(p) % tiles_per_row * edge;
        const SensingMatrix phi = sensed.tile_matrix(p);
        const auto& rows = phi.selected_rows();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const int r = row0 + rows[i] % edge;
            const int c = col0 + rows[i] / edge;
            known.at(r, c) = sensed.measurements[p][static_cast<Eigen::Index>(i)];
            mask[static_cast<std::size_t>(r) * width + c] = 1;
        }
    }

    std::vector<Measurement> measurements;
    PatchGrid grid;
    grid.patch_edge = edge;
    grid.stride = options.stride;
    auto add_patch = [&](int row, int col) {
        std::vector<int> kept;
        std::vector<double> values;
        for (int c = 0; c < edge; ++c) {
            for (int r = 0; r < edge; ++r) {
                if (mask[static_cast<std::size_t>(row + r) * width + col + c]) {
                    kept.push_back(c * edge + r);
                    values.push_back(known.at(row + r, col + c));
                }
            }
        }
        if (kept.empty()) return;
        Vector y = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
        measurements.push_back({SensingMatrix::from_selection(std::move(kept), n), std::move(y)});
        grid.positions.emplace_back(row, col);
    };
    for (int r = 0; r + edge <= height; r += options.stride) {
        for (int c = 0; c + edge <= width; c += options.stride) add_patch(r, c);
    }

    const Gmm start = adapt_to_measurements(init, measurements, options.reg_epsilon);
        EmState state = map_em_decode(measurements, start, options.em_iterations, options.reg_epsilon);
    grid.patches = state.estimates;
    GrayImage image = assemble_patches(grid, width, height);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) image.pixels[i] = known.pixels[i];
    }
    quantize_pixels(image);
    return {std::move(image), std::move(state)};
}

}  // namespace scs
