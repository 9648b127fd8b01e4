#include "weee/xray.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace weee::xray {

void ScannerConfig::validate(double belt_width_mm) const {
    if (!(line_rate_hz > 0.0)) throw std::invalid_argument("line rate must be positive");
    if (!(pixel_pitch_mm > 0.0)) throw std::invalid_argument("pixel pitch must be positive");
    if (width_px <= 0) throw std::invalid_argument("detector width must be positive");
    if (std::abs(width_px * pixel_pitch_mm - belt_width_mm) > 1e-6)
        throw std::invalid_argument("width_px * pixel_pitch must equal the belt width");
    if (!(i0_low > 0.0) || !(i0_high > 0.0))
        throw std::invalid_argument("source intensities must be positive");
    if (i0_low > 65535.0 || i0_high > 65535.0)
        throw std::invalid_argument("source intensities must fit 16 bit");
    if (frame_height_lines <= 0 || frame_height_lines % 2 != 0)
        throw std::invalid_argument("frame height must be a positive even line count");
    if (bin_factor < 1) throw std::invalid_argument("bin factor must be >= 1");
    if (bin_factor > 1 &&
        (frame_height_lines % bin_factor != 0 || width_px % bin_factor != 0))
        throw std::invalid_argument("bin factor must divide the frame dimensions");
    for (const auto* ref : {&white_ref_low, &white_ref_high}) {
        if (!ref->empty() && static_cast<int>(ref->size()) != width_px)
            throw std::invalid_argument("white reference length must match detector width");
        for (double w : *ref)
            if (!(w > 0.0)) throw std::invalid_argument("white reference must be positive");
    }
}

double attenuate(double i0, double mu_x_sum) { return i0 * std::exp(-mu_x_sum); }

namespace {

constexpr double kU16Max = 65535.0;

uint16_t quantize(double expected) {
    return static_cast<uint16_t>(std::clamp(std::llround(expected), 0LL, 65535LL));
}

// Piecewise-constant attenuation profile across the belt for one line.
struct Segment {
    double y0, y1;
    double mu_low, mu_high;
};

void collect_segments(const Scene& scene, double t, std::vector<Segment>& out) {
    out.clear();
    const double v = scene.belt_speed_mm_s;
    for (const DeviceInstance& d : scene.devices) {
        const double lead = d.x_front_mm + v * t;
        if (lead < 0.0 || lead > d.length_mm) continue;  // not over the detector line
        out.push_back({d.y_mm, d.y_mm + d.width_mm, d.material.mu_low * d.thickness_mm,
                       d.material.mu_high * d.thickness_mm});
        // Distance from the leading edge back to the detector line.
        const double cut = d.length_mm - lead;  // offset from the upstream edge
        for (const BatteryInstance& b : d.batteries) {
            if (cut < b.dx_mm || cut > b.dx_mm + b.length_mm) continue;
            out.push_back({d.y_mm + b.dy_mm, d.y_mm + b.dy_mm + b.width_mm,
                           b.material.mu_low * b.thickness_mm,
                           b.material.mu_high * b.thickness_mm});
        }
    }
}

int first_pixel(double y, double pitch, int width) {
    const int p = static_cast<int>(std::ceil(y / pitch - 0.5));
    return std::clamp(p, 0, width);
}

}  // namespace

void scan_line_into(const Scene& scene, double t, const ScannerConfig& cfg, std::mt19937_64* rng,
                    uint16_t* low, uint16_t* high) {
    if (cfg.noise == NoiseMode::Poisson && rng == nullptr)
        throw std::logic_error("poisson noise mode needs a generator");

    static thread_local std::vector<Segment> segments;
    collect_segments(scene, t, segments);

    const int w = cfg.width_px;
    if (cfg.noise == NoiseMode::Deterministic) {
        const uint16_t base_low = quantize(cfg.i0_low);
        const uint16_t base_high = quantize(cfg.i0_high);
        std::fill(low, low + w, base_low);
        std::fill(high, high + w, base_high);
        if (segments.empty()) return;

        // Sweep elementary intervals between segment edges; exponents add
        // where slabs stack.
        std::vector<double> edges;
        edges.reserve(segments.size() * 2);
        for (const Segment& s : segments) {
            edges.push_back(s.y0);
            edges.push_back(s.y1);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (size_t e = 0; e + 1 < edges.size(); ++e) {
            double mu_l = 0.0, mu_h = 0.0;
            const double y_mid = 0.5 * (edges[e] + edges[e + 1]);
            for (const Segment& s : segments) {
                if (y_mid >= s.y0 && y_mid < s.y1) {
                    mu_l += s.mu_low;
                    mu_h += s.mu_high;
                }
            }
            if (mu_l == 0.0 && mu_h == 0.0) continue;
            const uint16_t vl = quantize(attenuate(cfg.i0_low, mu_l));
            const uint16_t vh = quantize(attenuate(cfg.i0_high, mu_h));
            const int p0 = first_pixel(edges[e], cfg.pixel_pitch_mm, w);
            const int p1 = first_pixel(edges[e + 1], cfg.pixel_pitch_mm, w);
            std::fill(low + p0, low + p1, vl);
            std::fill(high + p0, high + p1, vh);
        }
        return;
    }

    // Poisson mode: per-pixel expected values, then one sample per pixel.
    static thread_local std::vector<double> lam_low, lam_high;
    lam_low.assign(static_cast<size_t>(w), cfg.i0_low);
    lam_high.assign(static_cast<size_t>(w), cfg.i0_high);
    for (const Segment& s : segments) {
        const int p0 = first_pixel(s.y0, cfg.pixel_pitch_mm, w);
        const int p1 = first_pixel(s.y1, cfg.pixel_pitch_mm, w);
        const double fl = std::exp(-s.mu_low);
        const double fh = std::exp(-s.mu_high);
        for (int p = p0; p < p1; ++p) {
            lam_low[static_cast<size_t>(p)] *= fl;
            lam_high[static_cast<size_t>(p)] *= fh;
        }
    }
    for (int p = 0; p < w; ++p) {
        std::poisson_distribution<long> dl(lam_low[static_cast<size_t>(p)]);
        std::poisson_distribution<long> dh(lam_high[static_cast<size_t>(p)]);
        low[p] = static_cast<uint16_t>(std::clamp(dl(*rng), 0L, 65535L));
        high[p] = static_cast<uint16_t>(std::clamp(dh(*rng), 0L, 65535L));
    }
}

LineScan scan_line(const Scene& scene, double t, const ScannerConfig& cfg, std::mt19937_64* rng) {
    LineScan line;
    line.timestamp_s = t;
    line.low.resize(static_cast<size_t>(cfg.width_px));
    line.high.resize(static_cast<size_t>(cfg.width_px));
    scan_line_into(scene, t, cfg, rng, line.low.data(), line.high.data());
    return line;
}

LineScan flat_field(const LineScan& raw, std::span<const double> white_low,
                    std::span<const double> white_high) {
    if (white_low.size() != raw.low.size() || white_high.size() != raw.high.size())
        throw std::invalid_argument("white reference length must match the line width");
    auto apply = [](const std::vector<uint16_t>& in, std::span<const double> white,
                    std::vector<uint16_t>& out) {
        double sum = 0.0;
        for (double wv : white) {
            if (!(wv > 0.0)) throw ZeroWhiteReference("white reference contains a non-positive pixel");
            sum += wv;
        }
        const double mean = sum / static_cast<double>(white.size());
        out.resize(in.size());
        for (size_t p = 0; p < in.size(); ++p) {
            const double corrected = in[p] * (mean / white[p]);
            out[p] = static_cast<uint16_t>(
                std::clamp(std::llround(corrected), 0LL, static_cast<long long>(kU16Max)));
        }
    };
    LineScan out;
    out.timestamp_s = raw.timestamp_s;
    apply(raw.low, white_low, out.low);
    apply(raw.high, white_high, out.high);
    return out;
}

Image16 bin_pixels(const Image16& frame16, int factor) {
    if (factor <= 0) throw std::invalid_argument("bin factor must be positive");
    if (factor == 1) return frame16;
    if (frame16.rows % factor != 0 || frame16.cols % factor != 0)
        throw NonDivisibleShape("bin factor must divide both image dimensions");
    Image16 out(frame16.rows / factor, frame16.cols / factor);
    const double inv = 1.0 / (factor * factor);
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            uint64_t sum = 0;
            for (int dr = 0; dr < factor; ++dr) {
                const uint16_t* row = frame16.row(r * factor + dr) + c * factor;
                for (int dc = 0; dc < factor; ++dc) sum += row[dc];
            }
            out.at(r, c) = static_cast<uint16_t>(std::llround(static_cast<double>(sum) * inv));
        }
    }
    return out;
}

Image8 to_8bit(const Image16& frame16, double white_level) {
    if (!(white_level > 0.0)) throw std::invalid_argument("white level must be positive");
    Image8 out(frame16.rows, frame16.cols);
    // 16-bit domain is small enough for a lookup table.
    std::array<uint8_t, 65536> lut;
    for (size_t v = 0; v < lut.size(); ++v)
        lut[v] = static_cast<uint8_t>(
            std::llround(255.0 * std::min(static_cast<double>(v) / white_level, 1.0)));
    for (size_t i = 0; i < frame16.px.size(); ++i) out.px[i] = lut[frame16.px[i]];
    return out;
}

const uint16_t* DualEnergyFrame::low_row(int r) const {
    const int half = rows_ / 2;
    const Chunk& chunk = r < half ? *top_ : *bottom_;
    return chunk.low.data() + static_cast<size_t>(r % half) * cols_;
}

const uint16_t* DualEnergyFrame::high_row(int r) const {
    const int half = rows_ / 2;
    const Chunk& chunk = r < half ? *top_ : *bottom_;
    return chunk.high.data() + static_cast<size_t>(r % half) * cols_;
}

namespace {

Image8 materialize(const DualEnergyFrame& frame, const std::vector<double>& gain_low,
                   const std::vector<double>& gain_high, double white, int bin_factor,
                   bool total_energy) {
    const int rows = frame.rows(), cols = frame.cols();
    // Flat field (16-bit, rounded) then TE composition in wider arithmetic.
    Image<uint32_t> wide(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const uint16_t* lo = frame.low_row(r);
        const uint16_t* hi = frame.high_row(r);
        uint32_t* out = wide.row(r);
        if (gain_low.empty()) {
            if (total_energy)
                for (int c = 0; c < cols; ++c) out[c] = static_cast<uint32_t>(lo[c]) + hi[c];
            else
                for (int c = 0; c < cols; ++c) out[c] = hi[c];
        } else {
            for (int c = 0; c < cols; ++c) {
                const auto ffl = static_cast<uint32_t>(std::clamp(
                    std::llround(lo[c] * gain_low[static_cast<size_t>(c)]), 0LL, 65535LL));
                const auto ffh = static_cast<uint32_t>(std::clamp(
                    std::llround(hi[c] * gain_high[static_cast<size_t>(c)]), 0LL, 65535LL));
                out[c] = total_energy ? ffl + ffh : ffh;
            }
        }
    }
    if (bin_factor > 1) {
        Image<uint32_t> binned(rows / bin_factor, cols / bin_factor);
        const double inv = 1.0 / (bin_factor * bin_factor);
        for (int r = 0; r < binned.rows; ++r)
            for (int c = 0; c < binned.cols; ++c) {
                uint64_t sum = 0;
                for (int dr = 0; dr < bin_factor; ++dr) {
                    const uint32_t* row = wide.row(r * bin_factor + dr) + c * bin_factor;
                    for (int dc = 0; dc < bin_factor; ++dc) sum += row[dc];
                }
                binned.at(r, c) =
                    static_cast<uint32_t>(std::llround(static_cast<double>(sum) * inv));
            }
        wide = std::move(binned);
    }
    Image8 out(wide.rows, wide.cols);
    const double inv_white = 1.0 / white;
    for (size_t i = 0; i < wide.px.size(); ++i)
        out.px[i] = static_cast<uint8_t>(
            std::llround(255.0 * std::min(static_cast<double>(wide.px[i]) * inv_white, 1.0)));
    return out;
}

}  // namespace

Image8 DualEnergyFrame::te8() const {
    return materialize(*this, processing_->gain_low, processing_->gain_high,
                       processing_->white_te, processing_->bin_factor, true);
}

Image8 DualEnergyFrame::he8() const {
    return materialize(*this, processing_->gain_low, processing_->gain_high,
                       processing_->white_he, processing_->bin_factor, false);
}

FrameAssembler::FrameAssembler(const ScannerConfig& cfg) : cfg_(cfg) {
    auto proc = std::make_shared<DualEnergyFrame::Processing>();
    if (!cfg.white_ref_low.empty() || !cfg.white_ref_high.empty()) {
        auto gains = [&](const std::vector<double>& ref) {
            std::vector<double> g(static_cast<size_t>(cfg.width_px), 1.0);
            if (ref.empty()) return g;
            const double mean =
                std::accumulate(ref.begin(), ref.end(), 0.0) / static_cast<double>(ref.size());
            for (size_t p = 0; p < ref.size(); ++p) {
                if (!(ref[p] > 0.0))
                    throw ZeroWhiteReference("white reference contains a non-positive pixel");
                g[p] = mean / ref[p];
            }
            return g;
        };
        proc->gain_low = gains(cfg.white_ref_low);
        proc->gain_high = gains(cfg.white_ref_high);
    }
    proc->white_te = cfg.effective_white_te();
    proc->white_he = cfg.effective_white_he();
    proc->bin_factor = cfg.bin_factor;
    processing_ = std::move(proc);

    current_ = std::make_shared<DualEnergyFrame::Chunk>();
    const size_t half = static_cast<size_t>(cfg_.frame_height_lines / 2) * cfg_.width_px;
    current_->low.resize(half);
    current_->high.resize(half);
}

std::pair<uint16_t*, uint16_t*> FrameAssembler::next_line_storage() {
    const size_t off = static_cast<size_t>(lines_in_current_) * cfg_.width_px;
    return {current_->low.data() + off, current_->high.data() + off};
}

std::optional<DualEnergyFrame> FrameAssembler::commit_line(double timestamp_s) {
    ++lines_in_current_;
    ++lines_pushed_;
    if (lines_in_current_ < cfg_.frame_height_lines / 2) return std::nullopt;

    std::shared_ptr<const DualEnergyFrame::Chunk> full = std::move(current_);
    current_ = std::make_shared<DualEnergyFrame::Chunk>();
    current_->low.resize(full->low.size());
    current_->high.resize(full->high.size());
    lines_in_current_ = 0;

    if (!previous_) {  // buffer not full yet: no frame until H lines arrived
        previous_ = std::move(full);
        return std::nullopt;
    }

    DualEnergyFrame frame;
    frame.index_ = frames_emitted_++;
    frame.origin_mm_ =
        static_cast<double>(frame.index_) * (cfg_.frame_height_lines / 2) * cfg_.pixel_pitch_mm;
    frame.stamp_s_ = timestamp_s;
    frame.rows_ = cfg_.frame_height_lines;
    frame.cols_ = cfg_.width_px;
    frame.mm_per_px_ = cfg_.pixel_pitch_mm;
    frame.top_ = previous_;
    frame.bottom_ = full;
    frame.processing_ = processing_;
    previous_ = std::move(full);
    return frame;
}

std::optional<DualEnergyFrame> FrameAssembler::push_line(const LineScan& line) {
    if (static_cast<int>(line.low.size()) != cfg_.width_px ||
        static_cast<int>(line.high.size()) != cfg_.width_px)
        throw std::invalid_argument("line width does not match the scanner configuration");
    auto [lo, hi] = next_line_storage();
    std::copy(line.low.begin(), line.low.end(), lo);
    std::copy(line.high.begin(), line.high.end(), hi);
    return commit_line(line.timestamp_s);
}

}  // namespace weee::xray
