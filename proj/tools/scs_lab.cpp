// scs_lab: experiment driver for statistical compressed sensing.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scs/analysis.hpp"
#include "scs/approximation.hpp"
#include "scs/errors.hpp"
#include "scs/imaging.hpp"
#include "scs/parallel.hpp"
#include "scs/random.hpp"

namespace {

using namespace scs;

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::uint64_t seed = 7;
    std::string out;
    unsigned threads = 0;
    bool deterministic = false;
};

std::string fmt_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// CSV sink writing to --out or stdout.
class Csv {
public:
    Csv(const Common& common, const std::string& subcommand, const std::vector<std::string>& columns) {
        if (!common.out.empty()) {
            file_ = std::make_unique<std::ofstream>(common.out, std::ios::binary);
            if (!*file_) throw IoError("cannot write " + common.out);
        }
        std::ostream& os = stream();
        os << "# scs-lab v1 " << subcommand << " seed=" << common.seed << '\n';
        if (!common.deterministic) {
            const std::time_t now = std::time(nullptr);
            char stamp[32];
            std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            os << "# generated " << stamp << '\n';
        }
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
    }

    Csv& operator<<(double v) { return cell(fmt_real(v)); }
    Csv& operator<<(long long v) { return cell(std::to_string(v)); }
    Csv& operator<<(const std::string& v) { return cell(v); }

    void end_row() {
        stream() << row_.str() << '\n';
        row_.str("");
        first_ = true;
        if (!stream()) throw IoError("write failed");
    }

private:
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    Csv& cell(const std::string& s) {
        if (!first_) row_ << ',';
        row_ << s;
        first_ = false;
        return *this;
    }

    std::unique_ptr<std::ofstream> file_;
    std::ostringstream row_;
    bool first_ = true;
};

void progress(const std::string& line) { std::cerr << line << '\n'; }

std::vector<double> alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 16; ++i) grid.push_back(1.0 + 0.25 * i);
    return grid;
}

SensingFamily family_or_throw(const std::string& name) {
    const auto family = parse_family(name);
    if (!family) throw InvalidArgument("unknown sensing family '" + name + "'");
    return *family;
}

// ---------------------------------------------------------------------------

struct ApproxArgs {
    int n = 64;
    std::optional<double> alpha;
    std::optional<int> k;
    std::int64_t trials = 10000;
};

void cmd_approx(const Common& c, const ApproxArgs& a) {
    Csv csv(c, "approx", {"n", "alpha", "k", "linear_mse", "nonlinear_mse", "linear_closed_form", "difference",
                          "difference_std_error", "ratio"});
    std::vector<std::pair<double, int>> points;
    if (a.k && !a.alpha) {
        for (double alpha : alpha_grid()) points.emplace_back(alpha, *a.k);
    } else {
        const double alpha = a.alpha.value_or(3.0);
        if (a.k) points.emplace_back(alpha, *a.k);
        else for (int k = 1; k < a.n; ++k) points.emplace_back(alpha, k);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [alpha, k] = points[i];
        const ApproxErrorReport r = approx_error_report(power_decay_spectrum(a.n, alpha), k, a.trials, derive_seed(c.seed, i));
        const double lin = r.normalized_linear();
        const double non = r.normalized_nonlinear();
        csv << static_cast<long long>(a.n) << alpha << static_cast<long long>(k) << lin << non
            << r.linear_mse_closed_form / r.signal_energy << lin - non << r.difference_std_error / r.signal_energy
            << (non > 0.0 ? lin / non : std::nan(""));
        csv.end_row();
        progress("approx alpha=" + fmt_real(alpha) + " k=" + std::to_string(k));
    }
}

// ---------------------------------------------------------------------------

struct RatioArgs {
    int n = 64;
    std::optional<double> alpha;
    std::optional<int> k;
    std::optional<int> m;
    std::string family = "gaussian";
    std::int64_t trials = 10000;
};

void cmd_scs_ratio(const Common& c, const RatioArgs& a) {
    const SensingFamily family = family_or_throw(a.family);
    Csv csv(c, "scs-ratio", {"n", "alpha", "k", "m", "family", "scs_mse", "scs_std_error", "bestk_mse", "ratio",
                             "ratio_std_error"});
    std::vector<std::pair<double, int>> points;
    if (a.k && !a.alpha) {
        for (double alpha : alpha_grid()) points.emplace_back(alpha, *a.k);
    } else {
        const double alpha = a.alpha.value_or(3.0);
        if (a.k) points.emplace_back(alpha, *a.k);
        else for (int k = 4; k <= a.n / 2; k += 4) points.emplace_back(alpha, k);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [alpha, k] = points[i];
        const int m = a.m.value_or(k);
        const ScsRatioReport r =
            scs_vs_bestk_ratio(power_decay_spectrum(a.n, alpha), k, m, family, a.trials, derive_seed(c.seed, i));
        csv << static_cast<long long>(a.n) << alpha << static_cast<long long>(k) << static_cast<long long>(m)
            << std::string(to_string(family)) << r.scs_mse << r.scs_std_error << r.bestk_mse << r.ratio
            << r.ratio_std_error;
        csv.end_row();
        progress("scs-ratio alpha=" + fmt_real(alpha) + " k=" + std::to_string(k));
    }
}

// ---------------------------------------------------------------------------

struct RipArgs {
    int n = 64;
    double alpha = 3.0;
    std::optional<int> k;
    std::optional<int> m;
    std::string family = "gaussian";
    std::string sweep = "m";
    std::int64_t trials = 2000;
};

void cmd_rip(const Common& c, const RipArgs& a) {
    const SensingFamily family = family_or_throw(a.family);
    const GaussianModel model = make_gaussian(power_decay_spectrum(a.n, a.alpha).values().asDiagonal().toDenseMatrix(), 0.0);
    Csv csv(c, "rip", {"n", "alpha", "k", "m", "family", "a_k", "b_k", "c0", "c0_std_error", "null_space_ratio",
                       "null_space_ratio_std_error"});
    std::vector<std::pair<int, int>> points;
    if (a.sweep == "k") {
        for (int k = 2; k < a.n; k += 2) points.emplace_back(k, k);
    } else if (a.sweep == "m") {
        const int k = a.k.value_or(10);
        if (a.m) points.emplace_back(k, *a.m);
        else for (int m = 1; m < a.n; ++m) points.emplace_back(k, m);
    } else {
        throw InvalidArgument("rip: --sweep must be m or k");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [k, m] = points[i];
        const RipExpectationReport r = rip_expectation(model, family, k, m, a.trials, derive_seed(c.seed, i));
        csv << static_cast<long long>(a.n) << a.alpha << static_cast<long long>(k) << static_cast<long long>(m)
            << std::string(to_string(family)) << r.a_K << r.b_K << r.c0 << r.c0_std_error << r.null_space_ratio
            << r.null_space_ratio_std_error;
        csv.end_row();
        progress("rip k=" + std::to_string(k) + " m=" + std::to_string(m));
    }
}

// ---------------------------------------------------------------------------

struct KlArgs {
    std::string sweep = "theta";
    std::vector<double> ratios{5, 10, 40, 100};
    std::vector<int> dims{2, 5, 10, 20, 40, 64};
    double alpha = 3.0;
};

void cmd_kl(const Common& c, const KlArgs& a) {
    if (a.sweep == "theta") {
        Csv csv(c, "kl", {"ratio", "theta_deg", "kl"});
        for (double ratio : a.ratios) {
            if (!(ratio >= 1.0)) throw InvalidArgument("kl: ratios must be >= 1");
            const Spectrum spectrum(Vector{{ratio, 1.0}});
            const Matrix s1 = spectrum.values().asDiagonal();
            for (int deg = 5; deg <= 90; deg += 5) {
                const Matrix s2 = rotate_spectrum(spectrum, rotation_2d(deg * std::numbers::pi / 180.0));
                csv << ratio << static_cast<long long>(deg) << kl_gaussians(s1, s2);
                csv.end_row();
            }
            progress("kl ratio=" + fmt_real(ratio));
        }
    } else if (a.sweep == "n") {
        Csv csv(c, "kl", {"n", "alpha", "kl"});
        for (int n : a.dims) {
            const auto pair = anti_diagonal_pair(n, power_decay_spectrum(n, a.alpha), 0.0);
            csv << static_cast<long long>(n) << a.alpha << kl_gaussians(pair.first.covariance(), pair.second.covariance());
            csv.end_row();
        }
    } else {
        throw InvalidArgument("kl: --sweep must be theta or n");
    }
}

// ---------------------------------------------------------------------------

struct SelectArgs {
    std::string mode = "oracle";
    std::string sweep;
    int n = 10;
    double alpha = 3.0;
    std::optional<int> m;
    std::string family = "gaussian";
    std::int64_t trials = 10000;
};

void cmd_select(const Common& c, const SelectArgs& a) {
    const SensingFamily family = family_or_throw(a.family);
    const bool oracle = a.mode == "oracle";
    if (!oracle && a.mode != "compressed") throw InvalidArgument("select: --mode must be oracle or compressed");
    const std::string sweep = a.sweep.empty() ? (oracle ? "alpha" : "m") : a.sweep;

    struct Point {
        int n;
        double alpha;
        int m;
    };
    std::vector<Point> points;
    if (sweep == "alpha") {
        for (double alpha : alpha_grid()) points.push_back({a.n, alpha, a.m.value_or(a.n)});
    } else if (sweep == "n") {
        for (int n = 2; n <= 20; ++n) points.push_back({n, a.alpha, a.m.value_or(n)});
    } else if (sweep == "m") {
        if (oracle) throw InvalidArgument("select: the oracle mode has no M sweep");
        if (a.m) points.push_back({a.n, a.alpha, *a.m});
        else for (int m = 1; m <= a.n; ++m) points.push_back({a.n, a.alpha, m});
    } else {
        throw InvalidArgument("select: --sweep must be alpha, n or m");
    }

    Csv csv(c, "select", {"mode", "n", "alpha", "m", "family", "p_correct", "p_std_error", "mse", "mse_std_error"});
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point& p = points[i];
        const auto pair = anti_diagonal_pair(p.n, power_decay_spectrum(p.n, p.alpha));
        const SelectionReport r = oracle ? oracle_selection_prob(pair.first, pair.second, a.trials, derive_seed(c.seed, i))
                                         : compressed_selection_prob(pair.first, pair.second, p.m, family, a.trials,
                                                                     derive_seed(c.seed, i));
        csv << a.mode << static_cast<long long>(p.n) << p.alpha << static_cast<long long>(oracle ? p.n : p.m)
            << std::string(oracle ? "none" : to_string(family)) << r.p_correct << r.p_std_error << r.mse
            << r.mse_std_error;
        csv.end_row();
        progress("select n=" + std::to_string(p.n) + " alpha=" + fmt_real(p.alpha) + " m=" + std::to_string(p.m));
    }
}

// ---------------------------------------------------------------------------

struct SenseArgs {
    std::string input;
    double rate = 0.25;
    int patch = 8;
    std::string family = "pixel";
};

void cmd_sense(const Common& c, const SenseArgs& a) {
    if (c.out.empty()) throw InvalidArgument("sense: --out is required");
    const GrayImage image = load_pgm(std::filesystem::path(a.input));
    const SensedImage sensed = sense_image(image, a.patch, a.rate, family_or_throw(a.family), c.seed);
    save_sensed(sensed, std::filesystem::path(c.out));
    progress("sense " + std::to_string(sensed.width) + "x" + std::to_string(sensed.height) + " M=" +
             std::to_string(sensed.m) + " patches=" + std::to_string(sensed.measurements.size()));
}

struct DecodeArgs {
    std::string input;
    std::string image_out;
    std::string reference;
    std::string mode = "tiled";
    int iters = kDefaultEmIterations;
    int gaussians = 19;
    int stride = 1;
};

void cmd_decode(const Common& c, const DecodeArgs& a) {
    const SensedImage sensed = load_sensed(std::filesystem::path(a.input));
    DecodeImageOptions options;
    options.em_iterations = a.iters;
    options.gaussians = a.gaussians;
    options.stride = a.stride;
    DecodeMode mode;
    if (a.mode == "tiled") mode = DecodeMode::NonOverlapped;
    else if (a.mode == "overlapped") mode = DecodeMode::OverlappedSubsampling;
    else throw InvalidArgument("decode: --mode must be tiled or overlapped");

    const DecodedImage decoded = decode_image(sensed, mode, options);
    if (!a.image_out.empty()) save_pgm(decoded.image, std::filesystem::path(a.image_out));
    double quality = std::nan("");
    if (!a.reference.empty()) {
        const GrayImage reference = crop_to_multiple(load_pgm(std::filesystem::path(a.reference)), sensed.patch_edge);
        quality = psnr(reference, decoded.image);
    }
    Csv csv(c, "decode", {"mode", "family", "m", "n", "iteration", "objective", "psnr_db"});
    const auto& trace = decoded.state.objective_trace;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        csv << a.mode << std::string(to_string(sensed.family)) << static_cast<long long>(sensed.m)
            << static_cast<long long>(sensed.n()) << static_cast<long long>(i) << trace[i]
            << (i + 1 == trace.size() ? quality : std::nan(""));
        csv.end_row();
    }
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "base random seed");
    app->add_option("--out", c.out, "output path (CSV goes to stdout when omitted)");
    app->add_option("--threads", c.threads, "worker thread cap (0 = hardware)");
    app->add_flag("--deterministic", c.deterministic, "omit the timestamp comment line");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Statistical compressed sensing experiments"};
    app.require_subcommand(1);

    Common common;
    DecodeArgs decode_args;

    ApproxArgs approx_args;
    auto* approx = app.add_subcommand("approx", "best k-term linear vs nonlinear approximation");
    add_common(approx, common);
    approx->add_option("--n", approx_args.n)->check(CLI::Range(2, 4096));
    approx->add_option("--alpha", approx_args.alpha);
    approx->add_option("--k", approx_args.k)->check(CLI::PositiveNumber);
    approx->add_option("--trials", approx_args.trials)->check(CLI::PositiveNumber);

    RatioArgs ratio_args;
    auto* ratio = app.add_subcommand("scs-ratio", "SCS decoding error vs best k-term error");
    add_common(ratio, common);
    ratio->add_option("--n", ratio_args.n)->check(CLI::Range(2, 4096));
    ratio->add_option("--alpha", ratio_args.alpha);
    ratio->add_option("--k", ratio_args.k)->check(CLI::PositiveNumber);
    ratio->add_option("--m", ratio_args.m)->check(CLI::PositiveNumber);
    ratio->add_option("--family", ratio_args.family);
    ratio->add_option("--trials", ratio_args.trials)->check(CLI::PositiveNumber);

    RipArgs rip_args;
    auto* rip = app.add_subcommand("rip", "RIP in expectation constants");
    add_common(rip, common);
    rip->add_option("--n", rip_args.n)->check(CLI::Range(2, 4096));
    rip->add_option("--alpha", rip_args.alpha);
    rip->add_option("--k", rip_args.k)->check(CLI::PositiveNumber);
    rip->add_option("--m", rip_args.m)->check(CLI::PositiveNumber);
    rip->add_option("--family", rip_args.family);
    rip->add_option("--sweep", rip_args.sweep, "m (fixed k) or k (M = k)");
    rip->add_option("--trials", rip_args.trials)->check(CLI::PositiveNumber);

    KlArgs kl_args;
    auto* kl = app.add_subcommand("kl", "KL divergence between rotated Gaussians");
    add_common(kl, common);
    kl->add_option("--sweep", kl_args.sweep, "theta (2D rotation) or n (anti-diagonal pairs)");
    kl->add_option("--ratios", kl_args.ratios);
    kl->add_option("--dims", kl_args.dims);
    kl->add_option("--alpha", kl_args.alpha);

    SelectArgs select_args;
    auto* select = app.add_subcommand("select", "model selection probability");
    add_common(select, common);
    select->add_option("--mode", select_args.mode, "oracle or compressed");
    select->add_option("--sweep", select_args.sweep, "alpha, n or m");
    select->add_option("--n", select_args.n)->check(CLI::Range(2, 4096));
    select->add_option("--alpha", select_args.alpha);
    select->add_option("--m", select_args.m)->check(CLI::PositiveNumber);
    select->add_option("--family", select_args.family);
    select->add_option("--trials", select_args.trials)->check(CLI::PositiveNumber);

    SenseArgs sense_args;
    auto* sense_cmd = app.add_subcommand("sense", "sense a PGM image tile by tile");
    add_common(sense_cmd, common);
    sense_cmd->add_option("input", sense_args.input, "input PGM")->required();
    sense_cmd->add_option("--rate", sense_args.rate)->check(CLI::Range(0.0, 1.0));
    sense_cmd->add_option("--patch", sense_args.patch)->check(CLI::Range(2, 64));
    sense_cmd->add_option("--family", sense_args.family);

    auto* decode_cmd = app.add_subcommand("decode", "MAP-EM reconstruction of a sensed image");
    add_common(decode_cmd, common);
    decode_cmd->add_option("input", decode_args.input, "sensed container")->required();
    decode_cmd->add_option("--image", decode_args.image_out, "reconstructed PGM");
    decode_cmd->add_option("--reference", decode_args.reference, "original PGM for PSNR");
    decode_cmd->add_option("--mode", decode_args.mode, "tiled or overlapped");
    decode_cmd->add_option("--iters", decode_args.iters)->check(CLI::PositiveNumber);
    decode_cmd->add_option("--gaussians", decode_args.gaussians)->check(CLI::Range(2, 1000));
    decode_cmd->add_option("--stride", decode_args.stride)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (common.threads > 0) set_max_threads(common.threads);
        if (*approx) cmd_approx(common, approx_args);
        else if (*ratio) cmd_scs_ratio(common, ratio_args);
        else if (*rip) cmd_rip(common, rip_args);
        else if (*kl) cmd_kl(common, kl_args);
        else if (*select) cmd_select(common, select_args);
        else if (*sense_cmd) cmd_sense(common, sense_args);
        else if (*decode_cmd) cmd_decode(common, decode_args);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
