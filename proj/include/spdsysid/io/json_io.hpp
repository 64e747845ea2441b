#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/matrix.hpp"
#include "spdsysid/model/state_space.hpp"
#include "spdsysid/model/thermal_network.hpp"
#include "spdsysid/sysid/fit.hpp"

// JSON schemas.
//
// Material spec (flat, SI units):
//   {"volume": 1.8, "layer_thickness": 0.2, "conductivity": 0.72, "density": 1920,
//    "specific_heat": 780, "outdoor_convection": 25, "air_density": 1.2,
//    "air_specific_heat": 100}
//
// Model file:
//   {"format": "spdsysid-model", "version": 1, "dt": 3600,
//    "phi_a": [[...], ...], "phi_b": [[...], ...],
//    "frame": {"transform": [[...], ...], "offset_K": 284.1},
//    "spd": true, "symmetric": true,
//    "provenance": {"method": "riemannian", "seed": "0", "spec_sha256": "..."}}

namespace spdsysid::io {

using json = nlohmann::json;

inline constexpr const char* model_format = "spdsysid-model";
inline constexpr int model_version = 1;

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) throw ParseError(what + ": expected an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw ParseError(what + ": ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) throw ParseError(what + ": non-numeric entry");
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

inline model::MaterialSpec material_from_json(const json& j) {
    if (!j.is_object()) throw InvalidSpec("material spec must be a JSON object");
    const auto get = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number()) throw InvalidSpec(std::string("material spec needs numeric '") + key + "'");
        return j[key].get<double>();
    };
    model::MaterialSpec s{get("volume"),     get("layer_thickness"),   get("conductivity"),
                          get("density"),    get("specific_heat"),     get("outdoor_convection"),
                          get("air_density"), get("air_specific_heat")};
    s.validate();
    return s;
}

inline json material_to_json(const model::MaterialSpec& s) {
    return {{"volume", s.volume},
            {"layer_thickness", s.layer_thickness},
            {"conductivity", s.conductivity},
            {"density", s.density},
            {"specific_heat", s.specific_heat},
            {"outdoor_convection", s.outdoor_convection},
            {"air_density", s.air_density},
            {"air_specific_heat", s.air_specific_heat}};
}

inline json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline model::MaterialSpec load_material(const std::string& path) {
    return material_from_json(parse_json_text(read_text_file(path), path));
}

inline json model_to_json(const model::DiscreteLti& m, const std::map<std::string, std::string>& provenance = {}) {
    m.validate();
    json prov = json::object();
    for (const auto& [k, v] : provenance) prov[k] = v;
    return {{"format", model_format},
            {"version", model_version},
            {"dt", m.dt},
            {"phi_a", matrix_to_json(m.phi_a)},
            {"phi_b", matrix_to_json(m.phi_b)},
            {"frame", {{"transform", matrix_to_json(m.frame.transform)}, {"offset_K", m.frame.offset}}},
            {"symmetric", m.phi_a.is_symmetric()},
            {"spd", sysid::is_spd(m.phi_a)},
            {"provenance", std::move(prov)}};
}

inline model::DiscreteLti model_from_json(const json& j) try {
    if (!j.is_object() || j.value("format", "") != model_format) throw ParseError("not a spdsysid model file");
    if (j.value("version", 0) != model_version) throw ParseError("unsupported model file version");
    if (!j.contains("dt") || !j["dt"].is_number()) throw ParseError("model file needs numeric 'dt'");
    if (!j.contains("frame") || !j["frame"].is_object()) throw ParseError("model file needs a 'frame' object");
    model::DiscreteLti m;
    m.dt = j["dt"].get<double>();
    m.phi_a = matrix_from_json(j.at("phi_a"), "phi_a");
    m.phi_b = matrix_from_json(j.at("phi_b"), "phi_b");
    m.frame.transform = matrix_from_json(j["frame"].at("transform"), "frame.transform");
    m.frame.offset = j["frame"].value("offset_K", 0.0);
    m.validate();
    return m;
} catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
}

/// Pretty JSON with a trailing newline; doubles print in shortest round-trip form.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void save_model(const std::string& path, const model::DiscreteLti& m,
                       const std::map<std::string, std::string>& provenance = {}) {
    write_text_file(path, dump(model_to_json(m, provenance)));
}

inline model::DiscreteLti load_model(const std::string& path) {
    return model_from_json(parse_json_text(read_text_file(path), path));
}

}  // namespace spdsysid::io
