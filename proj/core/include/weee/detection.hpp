#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "weee/image.hpp"
#include "weee/scene.hpp"

namespace weee::det {

struct DetectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyMask : DetectionError {
    using DetectionError::DetectionError;
};

/// Box class: the device outline or one of the four battery types.
enum class BoxClass { Device, Cylindrical, Pouch, Button, Other };

const char* to_string(BoxClass c);
BoxClass box_class_from_string(const std::string& s);
BoxClass box_class_from_battery(xray::BatteryClass c);

/// Axis-aligned box in frame pixel coordinates. x_center counts columns
/// (across the belt), y_center counts rows (along the motion axis).
struct BoundingBox {
    double x_center = 0.0;
    double y_center = 0.0;
    double width = 0.0;
    double height = 0.0;
    BoxClass cls = BoxClass::Device;
    double score = 1.0;

    double left() const { return x_center - 0.5 * width; }
    double right() const { return x_center + 0.5 * width; }
    double top() const { return y_center - 0.5 * height; }
    double bottom() const { return y_center + 0.5 * height; }
    double area() const { return width * height; }
    bool contains(double x, double y) const {
        return x >= left() && x <= right() && y >= top() && y <= bottom();
    }
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// One 4-connected foreground component (extent summary of its mask).
struct Mask {
    int min_row = 0, min_col = 0, max_row = -1, max_col = -1;
    int64_t area = 0;
    int32_t label = 0;
};

struct Segmentation {
    Image32 labels;            // 0 = background, component labels start at 1
    std::vector<Mask> masks;   // components that survived the area filter
};

struct SegmenterConfig {
    int background_threshold = 250;  // on the 8-bit HE band
    int battery_threshold = 180;
    int64_t min_area_px = 50;
    double mm_per_px = 0.1;
    // Shape rule for the battery classes.
    double cylindrical_min_aspect = 3.0;
    double button_max_side_mm = 20.0;
    double button_max_aspect = 1.5;
    double pouch_min_area_mm2 = 1500.0;
};

/// Dark connected components of the HE band (geometric stand-in for the
/// segmentation network); components below min_area are discarded.
Segmentation segment_devices(const Image8& he8, const SegmenterConfig& cfg = {});

/// Extent box of a mask; integer centers round half down.
BoundingBox mask_to_bbox(const Mask& mask);

/// Darker blobs inside the segmented devices, classified by the shape rule.
std::vector<BoundingBox> detect_batteries(const Image8& he8, const Segmentation& seg,
                                          const SegmenterConfig& cfg = {});

/// Classify a battery component from its pixel extents.
BoxClass classify_battery_shape(double width_px, double height_px, const SegmenterConfig& cfg);

/// Exact projection of the scene into one frame window (the simulation-side
/// oracle). Boxes are clipped to the window; devices fully outside are
/// dropped.
struct GroundTruth {
    std::vector<BoundingBox> devices;
    std::vector<BoundingBox> batteries;
};
GroundTruth ground_truth_detections(const xray::Scene& scene, double origin_mm, int rows,
                                    int cols, double mm_per_px);

/// Battery-to-device matching by center containment; nested device boxes go
/// to the smallest-area container.
struct DeviceReport {
    BoundingBox device;
    std::vector<BoundingBox> batteries;
    bool has_battery = false;
};

struct MatchResult {
    std::vector<DeviceReport> reports;      // one per device box, device order
    std::vector<BoundingBox> unassigned;    // batteries outside every device
};

MatchResult match_batteries_to_devices(const std::vector<BoundingBox>& batteries,
                                       const std::vector<BoundingBox>& devices);

/// Per-frame detection record (external JSON schema).
struct FrameRecord {
    uint64_t frame_index = 0;
    double origin_mm = 0.0;
    double stamp_s = 0.0;
    double mm_per_px = 0.1;
    std::vector<BoundingBox> devices;
    std::vector<BoundingBox> batteries;
    MatchResult matches;
};

nlohmann::json frame_record_to_json(const FrameRecord& rec);
FrameRecord frame_record_from_json(const nlohmann::json& j);

}  // namespace weee::det
