#pragma once

// Newline-delimited JSON for per-window estimates. Absent rates are omitted
// keys, never nulls.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "fuse.hpp"
#include "vidio.hpp"

namespace blurvitals::records {

using nlohmann::json;

inline json to_json(const fuse::VitalEstimate& e) {
    json j;
    j["window_index"] = e.window_index;
    j["t_center_s"] = e.t_center_s;
    if (e.hr_bpm) j["hr_bpm"] = *e.hr_bpm;
    if (e.rr_bpm) j["rr_bpm"] = *e.rr_bpm;
    j["hr_quality_db"] = e.hr_quality;
    j["rr_quality_db"] = e.rr_quality;
    j["gated"] = e.gated;
    j["motion_intensity"] = e.motion_intensity;
    return j;
}

inline fuse::VitalEstimate estimate_from_json(const json& j) {
    fuse::VitalEstimate e;
    e.window_index = j.at("window_index").get<std::size_t>();
    e.t_center_s = j.at("t_center_s").get<double>();
    if (j.contains("hr_bpm")) e.hr_bpm = j.at("hr_bpm").get<double>();
    if (j.contains("rr_bpm")) e.rr_bpm = j.at("rr_bpm").get<double>();
    e.hr_quality = j.at("hr_quality_db").get<double>();
    e.rr_quality = j.at("rr_quality_db").get<double>();
    e.gated = j.at("gated").get<bool>();
    e.motion_intensity = j.at("motion_intensity").get<double>();
    return e;
}

inline std::string to_ndjson(const std::vector<fuse::VitalEstimate>& estimates) {
    std::string out;
    for (const auto& e : estimates) out += to_json(e).dump() + "\n";
    return out;
}

inline void write_estimates(const std::vector<fuse::VitalEstimate>& estimates, const std::filesystem::path& path) {
    vidio::detail::write_atomic(path, to_ndjson(estimates));
}

inline std::vector<fuse::VitalEstimate> read_estimates(const std::filesystem::path& path) {
    const auto bytes = vidio::detail::read_all(path);
    std::istringstream is(std::string(bytes.begin(), bytes.end()));
    std::vector<fuse::VitalEstimate> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(estimate_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace blurvitals::records
