#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spinsurf/spinor_field.hpp"
#include "spinsurf/surface_chart.hpp"

namespace spinsurf {

// One JSON document per run: grid, metric, frame, S, T_i, nu_i, the spinor
// blade coefficients and the immersion, node arrays in storage order. Mesh
// points are stored as well so exporters never recompute geometry.
nlohmann::json scene_json(const std::string& name, const Chart& chart, const GeometryData* data, const ImmersionField& surface,
                          const SpinorField* field = nullptr);

enum class ExportFormat { obj, ply, csv, json };
// Throws std::invalid_argument for anything but obj, ply, csv, json.
ExportFormat export_format(const std::string& name);

// Writes the scene's surface into `dir` and returns the written paths.
// obj/ply: mesh from the stored points (quadrics also get the R^4 CSV);
// csv: i,j and coordinates per node; json: vertices and triangles.
// Throws std::invalid_argument when the scene lacks grid or points,
// std::runtime_error when a file cannot be written.
std::vector<std::string> export_scene(const nlohmann::json& scene, ExportFormat format, const std::string& dir);

}  // namespace spinsurf
