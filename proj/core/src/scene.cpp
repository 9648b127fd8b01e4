#include "weee/scene.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace weee::xray {

const std::vector<Material>& builtin_materials() {
    static const std::vector<Material> table = {
        {"air", 0.0, 0.0},          {"plastic", 0.015, 0.008}, {"pcb", 0.06, 0.03},
        {"lithium-cell", 0.25, 0.12}, {"steel", 0.9, 0.5},
    };
    return table;
}

std::optional<Material> find_material(const std::string& name) {
    for (const Material& m : builtin_materials())
        if (m.name == name) return m;
    return std::nullopt;
}

const char* to_string(BatteryClass c) {
    switch (c) {
        case BatteryClass::Cylindrical: return "cylindrical";
        case BatteryClass::Pouch: return "pouch";
        case BatteryClass::Button: return "button";
        case BatteryClass::Other: return "other";
    }
    return "other";
}

BatteryClass battery_class_from_string(const std::string& s) {
    if (s == "cylindrical") return BatteryClass::Cylindrical;
    if (s == "pouch") return BatteryClass::Pouch;
    if (s == "button") return BatteryClass::Button;
    if (s == "other") return BatteryClass::Other;
    throw std::invalid_argument("unknown battery class: " + s);
}

void Scene::validate() const {
    if (!(belt_speed_mm_s > 0.0)) throw std::invalid_argument("belt speed must be positive");
    if (!(belt_width_mm > 0.0)) throw std::invalid_argument("belt width must be positive");
    for (const DeviceInstance& d : devices) {
        if (!(d.length_mm > 0.0 && d.width_mm > 0.0 && d.thickness_mm > 0.0))
            throw std::invalid_argument("device dimensions must be positive");
        if (d.y_mm < 0.0 || d.y_mm + d.width_mm > belt_width_mm)
            throw std::invalid_argument("device lies outside the belt");
        if (d.material.mu_low < d.material.mu_high || d.material.mu_high < 0.0)
            throw std::invalid_argument("material must satisfy mu_low >= mu_high >= 0");
        for (const BatteryInstance& b : d.batteries) {
            if (!(b.length_mm > 0.0 && b.width_mm > 0.0 && b.thickness_mm > 0.0))
                throw std::invalid_argument("battery dimensions must be positive");
            if (b.dx_mm < 0.0 || b.dy_mm < 0.0 || b.dx_mm + b.length_mm > d.length_mm ||
                b.dy_mm + b.width_mm > d.width_mm)
                throw std::invalid_argument("battery rectangle leaves its parent device");
            if (b.material.mu_low < b.material.mu_high || b.material.mu_high < 0.0)
                throw std::invalid_argument("material must satisfy mu_low >= mu_high >= 0");
        }
    }
}

namespace {

Material material_from_json(const nlohmann::json& j,
                            const std::vector<Material>& extra) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        for (const Material& m : extra)
            if (m.name == name) return m;
        if (auto m = find_material(name)) return *m;
        throw std::invalid_argument("unknown material: " + name);
    }
    Material m;
    m.name = j.value("name", "custom");
    m.mu_low = j.at("mu_low").get<double>();
    m.mu_high = j.at("mu_high").get<double>();
    return m;
}

nlohmann::json material_to_json(const Material& m) {
    return {{"name", m.name}, {"mu_low", m.mu_low}, {"mu_high", m.mu_high}};
}

}  // namespace

Scene scene_from_json(const nlohmann::json& j) {
    Scene scene;
    scene.belt_speed_mm_s = j.value("belt_speed_mm_s", 350.0);
    scene.belt_width_mm = j.value("belt_width_mm", 800.0);

    std::vector<Material> extra;
    if (j.contains("materials"))
        for (const auto& jm : j.at("materials")) extra.push_back(material_from_json(jm, {}));

    for (const auto& jd : j.value("devices", nlohmann::json::array())) {
        DeviceInstance d;
        d.id = jd.value("id", static_cast<int>(scene.devices.size()));
        d.x_front_mm = jd.at("x_front_mm").get<double>();
        d.y_mm = jd.at("y_mm").get<double>();
        d.length_mm = jd.at("length_mm").get<double>();
        d.width_mm = jd.at("width_mm").get<double>();
        d.thickness_mm = jd.at("thickness_mm").get<double>();
        d.material = material_from_json(jd.at("material"), extra);
        for (const auto& jb : jd.value("batteries", nlohmann::json::array())) {
            BatteryInstance b;
            b.id = jb.value("id", static_cast<int>(d.batteries.size()));
            b.battery_class = battery_class_from_string(jb.value("class", "other"));
            b.dx_mm = jb.at("dx_mm").get<double>();
            b.dy_mm = jb.at("dy_mm").get<double>();
            b.length_mm = jb.at("length_mm").get<double>();
            b.width_mm = jb.at("width_mm").get<double>();
            b.thickness_mm = jb.at("thickness_mm").get<double>();
            b.material = material_from_json(jb.at("material"), extra);
            d.batteries.push_back(std::move(b));
        }
        scene.devices.push_back(std::move(d));
    }
    scene.validate();
    return scene;
}

nlohmann::json scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["belt_speed_mm_s"] = scene.belt_speed_mm_s;
    j["belt_width_mm"] = scene.belt_width_mm;
    j["devices"] = nlohmann::json::array();
    for (const DeviceInstance& d : scene.devices) {
        nlohmann::json jd = {{"id", d.id},
                             {"x_front_mm", d.x_front_mm},
                             {"y_mm", d.y_mm},
                             {"length_mm", d.length_mm},
                             {"width_mm", d.width_mm},
                             {"thickness_mm", d.thickness_mm},
                             {"material", material_to_json(d.material)}};
        jd["batteries"] = nlohmann::json::array();
        for (const BatteryInstance& b : d.batteries) {
            jd["batteries"].push_back({{"id", b.id},
                                       {"class", to_string(b.battery_class)},
                                       {"dx_mm", b.dx_mm},
                                       {"dy_mm", b.dy_mm},
                                       {"length_mm", b.length_mm},
                                       {"width_mm", b.width_mm},
                                       {"thickness_mm", b.thickness_mm},
                                       {"material", material_to_json(b.material)}});
        }
        j["devices"].push_back(std::move(jd));
    }
    return j;
}

Scene load_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scene file: " + path);
    nlohmann::json j;
    in >> j;
    return scene_from_json(j);
}

}  // namespace weee::xray
