#include "morphiris/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "morphiris/errors.hpp"
#include "morphiris/parallel.hpp"
#include "morphiris/random.hpp"

namespace morphiris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// One octave of value noise: lattice of radial_cells+1 rows (clamped) by
// angular_cells columns (wrapped), smoothly interpolated.
struct Octave {
    std::size_t radial_cells;
    std::size_t angular_cells;
    std::vector<double> lattice;

    Octave(std::size_t rc, std::size_t ac, Rng& rng) : radial_cells(rc), angular_cells(ac), lattice((rc + 1) * ac) {
        for (auto& v : lattice) v = rng.normal();
    }

    double eval(double rho, double turn) const {
        const double r = rho * static_cast<double>(radial_cells);
        const double a = turn * static_cast<double>(angular_cells);
        const auto r0 = std::min(static_cast<std::size_t>(r), radial_cells - 1);
        const auto a0 = static_cast<std::size_t>(a) % angular_cells;
        const std::size_t a1 = (a0 + 1) % angular_cells;
        const double fr = smoothstep(r - static_cast<double>(r0));
        const double fa = smoothstep(a - std::floor(a));
        auto L = [&](std::size_t ri, std::size_t ai) { return lattice[ri * angular_cells + ai]; };
        const double lo = (1 - fa) * L(r0, a0) + fa * L(r0, a1);
        const double hi = (1 - fa) * L(r0 + 1, a0) + fa * L(r0 + 1, a1);
        return (1 - fr) * lo + fr * hi;
    }
};

}  // namespace

IdentityTexture::IdentityTexture(std::uint64_t seed) : seed_(seed), grid_(kRows * kCols) {
    Rng rng(derive_seed(seed, {0x7e47}));
    // Angular cells double per octave; amplitude decays so mid frequencies
    // (tens of cycles per turn) dominate, where the iris-code filter listens.
    const std::size_t radial[] = {2, 3, 5, 9, 16};
    const std::size_t angular[] = {8, 16, 32, 64, 128};
    const double amplitude[] = {0.5, 0.8, 1.0, 0.9, 0.6};
    std::vector<Octave> octaves;
    for (int o = 0; o < 5; ++o) octaves.emplace_back(radial[o], angular[o], rng);

    for (std::size_t r = 0; r < kRows; ++r) {
        const double rho = static_cast<double>(r) / (kRows - 1);
        for (std::size_t c = 0; c < kCols; ++c) {
            const double turn = static_cast<double>(c) / kCols;
            double v = 0.0;
            for (int o = 0; o < 5; ++o) v += amplitude[o] * octaves[o].eval(rho, turn);
            grid_[r * kCols + c] = v;
        }
    }

    double mean = 0.0;
    for (double v : grid_) mean += v;
    mean /= static_cast<double>(grid_.size());
    double var = 0.0;
    for (double v : grid_) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(grid_.size()));
    for (double& v : grid_) v = std::clamp(0.5 + 0.2 * (v - mean) / sd, 0.0, 1.0);
}

double IdentityTexture::sample(double rho, double theta) const {
    const double r = std::clamp(rho, 0.0, 1.0) * (kRows - 1);
    double turn = theta / kTwoPi;
    turn -= std::floor(turn);
    const double c = turn * kCols;
    const auto r0 = std::min(static_cast<std::size_t>(r), kRows - 2);
    const auto c0 = static_cast<std::size_t>(c) % kCols;
    const std::size_t c1 = (c0 + 1) % kCols;
    const double fr = r - static_cast<double>(r0);
    const double fc = c - std::floor(c);
    const double lo = (1 - fc) * at(r0, c0) + fc * at(r0, c1);
    const double hi = (1 - fc) * at(r0 + 1, c0) + fc * at(r0 + 1, c1);
    return (1 - fr) * lo + fr * hi;
}

void EyeRenderSpec::validate() const {
    constexpr double kMargin = 2.0;
    if (width == 0 || height == 0) throw ParameterError("render: image size must be positive");
    const double limit = static_cast<double>(std::min(width, height)) / 2.0 - kMargin;
    if (!(pupil_radius > 0.0 && pupil_radius < iris_radius && iris_radius < limit))
        throw ParameterError("render: need 0 < pupil_radius < iris_radius < min(w,h)/2 - margin");
    if (!(center.x - iris_radius >= 0.0 && center.x + iris_radius <= static_cast<double>(width - 1) &&
          center.y - iris_radius >= 0.0 && center.y + iris_radius <= static_cast<double>(height - 1)))
        throw ParameterError("render: iris does not fit inside the image");
    if (!(occlusion_fraction >= 0.0 && occlusion_fraction <= 0.4))
        throw ParameterError("render: occlusion_fraction must lie in [0, 0.4]");
    if (!(noise_sigma >= 0.0)) throw ParameterError("render: noise_sigma must be >= 0");
}

namespace {

// Rows strictly above this are eyelid; none when nothing is occluded.
double eyelid_line(const EyeRenderSpec& spec) {
    if (spec.occlusion_fraction <= 0.0) return -1.0;
    return spec.center.y - spec.iris_radius + 2.0 * spec.iris_radius * spec.occlusion_fraction;
}

}  // namespace

std::pair<GrayImage, IrisGeometry> render_eye(const EyeRenderSpec& spec) {
    spec.validate();
    return render_eye(spec, IdentityTexture(spec.identity_seed));
}

std::pair<GrayImage, IrisGeometry> render_eye(const EyeRenderSpec& spec, const IdentityTexture& texture) {
    spec.validate();
    GrayImage img(spec.width, spec.height);
    Rng noise(derive_seed(spec.noise_seed, {0x9015e}));
    const double lid = eyelid_line(spec);
    const double band = spec.iris_radius - spec.pupil_radius;

    for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
            const double dx = static_cast<double>(x) - spec.center.x;
            const double dy = static_cast<double>(y) - spec.center.y;
            const double d = std::hypot(dx, dy);
            double v;
            if (static_cast<double>(y) < lid) {
                v = RenderLevels::eyelid;
            } else if (d < spec.pupil_radius) {
                v = RenderLevels::pupil;
            } else if (d < spec.iris_radius) {
                const double rho = (d - spec.pupil_radius) / band + spec.radial_shift;
                const double t = texture.sample(rho, std::atan2(dy, dx) - spec.rotation);
                v = RenderLevels::iris_lo + (RenderLevels::iris_hi - RenderLevels::iris_lo) * t;
            } else {
                v = RenderLevels::sclera;
            }
            img.at(x, y) = to_pixel(v + spec.noise_sigma * noise.normal());
        }
    }

    IrisGeometry geom{EllipseParams::circle(spec.center.x, spec.center.y, spec.pupil_radius),
                      EllipseParams::circle(spec.center.x, spec.center.y, spec.iris_radius)};
    return {std::move(img), geom};
}

LabelMask render_labels(const EyeRenderSpec& spec) {
    spec.validate();
    LabelMask mask(spec.width, spec.height);
    const double lid = eyelid_line(spec);
    for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
            if (static_cast<double>(y) < lid) continue;
            const double d = std::hypot(static_cast<double>(x) - spec.center.x, static_cast<double>(y) - spec.center.y);
            if (d < spec.pupil_radius)
                mask.at(x, y) = Label::pupil;
            else if (d < spec.iris_radius)
                mask.at(x, y) = Label::iris;
        }
    }
    return mask;
}

std::string subject_id(std::size_t subject) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%03zu", subject);
    return buf;
}

std::string image_name(std::size_t subject, EyeSide side, std::size_t index) {
    return subject_id(subject) + "_" + side_code(side) + "_" + std::to_string(index) + ".pgm";
}

namespace {

std::uint64_t identity_seed(const DatasetOptions& opt, std::size_t subject, EyeSide side) {
    return derive_seed(opt.seed, {subject, static_cast<std::uint64_t>(side), 0x1d});
}

}  // namespace

EyeRenderSpec capture_spec(const DatasetOptions& opt, std::size_t subject, EyeSide side, std::size_t index) {
    // Per-identity constants come from the identity stream, per-capture
    // variation from a stream keyed by the capture index.
    Rng id_rng(derive_seed(opt.seed, {subject, static_cast<std::uint64_t>(side), 0x9e0}));
    const double iris_radius = id_rng.uniform(opt.iris_radius_range.first, opt.iris_radius_range.second);

    Rng rng(derive_seed(opt.seed, {subject, static_cast<std::uint64_t>(side), index, 0xca7}));
    EyeRenderSpec spec;
    spec.identity_seed = identity_seed(opt, subject, side);
    spec.width = opt.width;
    spec.height = opt.height;
    spec.pupil_radius = opt.pupil_radius_range.first == opt.pupil_radius_range.second
                            ? opt.pupil_radius_range.first
                            : rng.uniform(opt.pupil_radius_range.first, opt.pupil_radius_range.second);
    spec.iris_radius = iris_radius;
    spec.center = {static_cast<double>(opt.width - 1) / 2.0 + rng.uniform(-opt.center_jitter, opt.center_jitter),
                   static_cast<double>(opt.height - 1) / 2.0 + rng.uniform(-opt.center_jitter, opt.center_jitter)};
    spec.rotation = rng.uniform(-opt.max_rotation, opt.max_rotation);
    spec.radial_shift = rng.uniform(-opt.max_radial_shift, opt.max_radial_shift);
    spec.occlusion_fraction = rng.uniform(0.0, opt.max_occlusion);
    spec.noise_sigma = opt.noise_sigma;
    spec.noise_seed = rng.next_u64();
    return spec;
}

DatasetManifest generate_dataset(const DatasetOptions& opt, const std::filesystem::path& out_dir) {
    if (opt.n_subjects < 2) throw ParameterError("generate_dataset: n_subjects must be >= 2");
    if (opt.images_per_subject < 1) throw ParameterError("generate_dataset: images_per_subject must be >= 1");
    if (!(opt.pupil_radius_range.first > 0.0 && opt.pupil_radius_range.first <= opt.pupil_radius_range.second))
        throw ParameterError("generate_dataset: invalid pupil radius range");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        throw IoError("cannot create output directory " + out_dir.string());

    struct Job {
        std::size_t subject;
        EyeSide side;
        std::size_t index;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < opt.n_subjects; ++s)
        for (EyeSide side : {EyeSide::left, EyeSide::right})
            for (std::size_t k = 0; k < opt.images_per_subject; ++k) jobs.push_back({s, side, k});

    std::vector<ManifestEntry> entries(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto spec = capture_spec(opt, job.subject, job.side, job.index);
        const auto [img, geom] = render_eye(spec);
        const auto name = image_name(job.subject, job.side, job.index);
        save_pgm(out_dir / name, img);
        entries[i] = {subject_id(job.subject), job.side, name, spec.pupil_radius, spec.iris_radius};
    });

    DatasetManifest manifest{std::move(entries)};
    manifest.save(out_dir / "manifest.csv");
    return manifest;
}

DatasetManifest generate_dataset(std::size_t n_subjects, std::size_t images_per_subject,
                                 std::pair<double, double> pupil_radius_range, std::uint64_t seed,
                                 const std::filesystem::path& out_dir) {
    DatasetOptions opt;
    opt.n_subjects = n_subjects;
    opt.images_per_subject = images_per_subject;
    opt.pupil_radius_range = pupil_radius_range;
    opt.seed = seed;
    return generate_dataset(opt, out_dir);
}

}  // namespace morphiris
