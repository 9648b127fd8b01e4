#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace weee::xray {

/// Effective linear attenuation coefficients (1/mm) for the two detector
/// bands: low covers 10-60 keV, high covers >60 keV.
struct Material {
    std::string name;
    double mu_low = 0.0;
    double mu_high = 0.0;
};

/// Built-in fixture materials (contrast ordering matters, not physics).
const std::vector<Material>& builtin_materials();
std::optional<Material> find_material(const std::string& name);

enum class BatteryClass { Cylindrical, Pouch, Button, Other };

const char* to_string(BatteryClass c);
BatteryClass battery_class_from_string(const std::string& s);

/// Battery rectangle, offsets relative to the device's upstream-left corner.
struct BatteryInstance {
    int id = 0;
    BatteryClass battery_class = BatteryClass::Cylindrical;
    double dx_mm = 0.0;  // offset along motion
    double dy_mm = 0.0;  // offset across belt
    double length_mm = 0.0;  // extent along motion
    double width_mm = 0.0;   // extent across belt
    double thickness_mm = 0.0;
    Material material;
};

/// Flat device on the belt. x_front_mm is the world x of the leading
/// (downstream) edge at t = 0; the device occupies
/// [x_front - length + v t, x_front + v t] along the motion axis.
struct DeviceInstance {
    int id = 0;
    double x_front_mm = 0.0;
    double y_mm = 0.0;  // near edge across belt
    double length_mm = 0.0;
    double width_mm = 0.0;
    double thickness_mm = 0.0;
    Material material;
    std::vector<BatteryInstance> batteries;

    bool has_battery() const { return !batteries.empty(); }
};

struct Scene {
    double belt_speed_mm_s = 350.0;
    double belt_width_mm = 800.0;
    std::vector<DeviceInstance> devices;

    void validate() const;  // throws std::invalid_argument
};

Scene scene_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const Scene& scene);
Scene load_scene_file(const std::string& path);

}  // namespace weee::xray
