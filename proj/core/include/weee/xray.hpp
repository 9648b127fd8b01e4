#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "weee/image.hpp"
#include "weee/scene.hpp"

namespace weee::xray {

struct XrayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroWhiteReference : XrayError {
    using XrayError::XrayError;
};
struct NonDivisibleShape : XrayError {
    using XrayError::XrayError;
};

enum class NoiseMode { Deterministic, Poisson };

struct ScannerConfig {
    double line_rate_hz = 3500.0;
    double pixel_pitch_mm = 0.1;
    int width_px = 8000;
    double i0_low = 40000.0;
    double i0_high = 40000.0;
    NoiseMode noise = NoiseMode::Deterministic;
    int frame_height_lines = 3500;
    int bin_factor = 1;  // 1 disables binning
    // Per-pixel white reference per band; empty means a flat ideal detector.
    std::vector<double> white_ref_low;
    std::vector<double> white_ref_high;
    // 8-bit conversion white levels; 0 = derive from source intensities.
    double white_level_te = 0.0;
    double white_level_he = 0.0;

    double effective_white_te() const { return white_level_te > 0.0 ? white_level_te : i0_low + i0_high; }
    double effective_white_he() const { return white_level_he > 0.0 ? white_level_he : i0_high; }
    void validate(double belt_width_mm) const;  // throws std::invalid_argument
};

/// Beer-Lambert attenuation: expected counts after a summed mu*x exponent.
double attenuate(double i0, double mu_x_sum);

/// One detector line: photon counts per pixel for the two energy bands.
struct LineScan {
    double timestamp_s = 0.0;
    std::vector<uint16_t> low;
    std::vector<uint16_t> high;
};

/// Scan the scene at time t into caller-provided row storage. In poisson
/// mode counts are sampled from the expected value using rng (required).
void scan_line_into(const Scene& scene, double t, const ScannerConfig& cfg, std::mt19937_64* rng,
                    uint16_t* low, uint16_t* high);

LineScan scan_line(const Scene& scene, double t, const ScannerConfig& cfg,
                   std::mt19937_64* rng = nullptr);

/// Per-pixel gain correction: pixel p scaled by mean(white)/white[p],
/// rounded and clamped to 16 bit.
LineScan flat_field(const LineScan& raw, std::span<const double> white_low,
                    std::span<const double> white_high);

/// Rounded mean over factor x factor blocks.
Image16 bin_pixels(const Image16& frame16, int factor);

/// out = round(255 * min(v / white_level, 1)).
Image8 to_8bit(const Image16& frame16, double white_level);

/// Two-band 8-bit frame emitted by the rolling line buffer. Raw 16-bit band
/// data is shared with the neighbouring frames (50% overlap); the processed
/// TE/HE images are materialized on demand.
class DualEnergyFrame {
public:
    uint64_t index() const { return index_; }
    double origin_mm() const { return origin_mm_; }
    /// Timestamp when the frame completed (its line count / line rate).
    double stamp_s() const { return stamp_s_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double mm_per_px() const { return mm_per_px_; }

    const uint16_t* low_row(int r) const;
    const uint16_t* high_row(int r) const;

    /// Total-energy band (low + high counts) after flat field, optional
    /// binning and 8-bit conversion.
    Image8 te8() const;
    /// High-energy band, same processing chain.
    Image8 he8() const;

private:
    friend class FrameAssembler;
    struct Chunk {
        std::vector<uint16_t> low;
        std::vector<uint16_t> high;
    };
    struct Processing {
        std::vector<double> gain_low;   // empty = unity
        std::vector<double> gain_high;
        double white_te = 1.0;
        double white_he = 1.0;
        int bin_factor = 1;
    };

    uint64_t index_ = 0;
    double origin_mm_ = 0.0;
    double stamp_s_ = 0.0;
    int rows_ = 0;
    int cols_ = 0;
    double mm_per_px_ = 0.1;
    std::shared_ptr<const Chunk> top_;
    std::shared_ptr<const Chunk> bottom_;
    std::shared_ptr<const Processing> processing_;
};

/// Rolling line buffer: emits a frame when it first holds frame_height_lines
/// lines and then after every frame_height_lines/2 new lines, so consecutive
/// frames share exactly half their rows bit-exactly.
class FrameAssembler {
public:
    explicit FrameAssembler(const ScannerConfig& cfg);

    std::optional<DualEnergyFrame> push_line(const LineScan& line);

    /// Zero-copy path: fill the returned row pointers for the next line,
    /// then commit it. Equivalent to push_line.
    std::pair<uint16_t*, uint16_t*> next_line_storage();
    std::optional<DualEnergyFrame> commit_line(double timestamp_s);

    uint64_t lines_pushed() const { return lines_pushed_; }
    uint64_t frames_emitted() const { return frames_emitted_; }

private:
    ScannerConfig cfg_;
    std::shared_ptr<const DualEnergyFrame::Processing> processing_;
    std::shared_ptr<DualEnergyFrame::Chunk> current_;
    std::shared_ptr<const DualEnergyFrame::Chunk> previous_;
    int lines_in_current_ = 0;
    uint64_t lines_pushed_ = 0;
    uint64_t frames_emitted_ = 0;
};

}  // namespace weee::xray
