#include "spinsurf/scene.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinsurf/immersion_reconstruct.hpp"

namespace spinsurf {

using nlohmann::json;

namespace {

json matrix_rows(const std::vector<Eigen::Matrix2d>& m) {
    json a = json::array();
    for (const auto& x : m) a.push_back({x(0, 0), x(0, 1), x(1, 0), x(1, 1)});
    return a;
}

template <class V>
json vector_rows(const std::vector<V>& v) {
    json a = json::array();
    for (const auto& x : v) {
        json r = json::array();
        for (Eigen::Index i = 0; i < x.size(); ++i) r.push_back(x(i));
        a.push_back(std::move(r));
    }
    return a;
}

Grid grid_of(const json& scene) {
    if (!scene.contains("grid")) throw std::invalid_argument("scene has no grid");
    const json& g = scene["grid"];
    try {
        Grid out{g.at("nu").get<int>(), g.at("nv").get<int>(), g.at("u0").get<double>(), g.at("v0").get<double>(),
                 g.at("hu").get<double>(), g.at("hv").get<double>()};
        if (out.nu < 2 || out.nv < 2) throw std::invalid_argument("scene grid needs at least 2 nodes per direction");
        return out;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scene grid is malformed: ") + e.what());
    }
}

std::vector<Eigen::Vector3d> points_of(const json& scene, const Grid& g) {
    if (!scene.contains("points")) throw std::invalid_argument("scene has no immersion points");
    const json& p = scene["points"];
    if (!p.is_array() || p.size() != static_cast<std::size_t>(g.size()))
        throw std::invalid_argument("scene points do not match the grid");
    std::vector<Eigen::Vector3d> out;
    out.reserve(p.size());
    for (const auto& r : p) {
        if (!r.is_array() || r.size() != 3) throw std::invalid_argument("scene points must be triples");
        out.emplace_back(r[0].get<double>(), r[1].get<double>(), r[2].get<double>());
    }
    return out;
}

std::string open_write(const std::string& dir, const std::string& file, const std::function<void(std::ostream&)>& body) {
    const std::string path = (std::filesystem::path(dir) / file).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    body(out);
    if (!out) throw std::runtime_error("write failed for " + path);
    return path;
}

void write_quadric_csv(std::ostream& out, const json& q, const Grid& g) {
    if (!q.is_array() || q.size() != static_cast<std::size_t>(g.size()))
        throw std::invalid_argument("scene quadric coordinates do not match the grid");
    ImmersionField f;
    f.kind = SpaceKind::de_sitter();
    f.grid = g;
    for (const auto& r : q) {
        if (!r.is_array() || r.size() != 4) throw std::invalid_argument("scene quadric coordinates must have 4 entries");
        f.quadric.emplace_back(r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>());
    }
    write_r4_csv(out, f);
}

}  // namespace

json scene_json(const std::string& name, const Chart& chart, const GeometryData* data, const ImmersionField& surface,
                const SpinorField* field) {
    const Grid& g = chart.grid;
    json s{{"name", name},
           {"space", surface.kind.name()},
           {"signature", chart.signature == SurfaceSignature::riemannian ? "riemannian" : "lorentzian"},
           {"grid", {{"nu", g.nu}, {"nv", g.nv}, {"u0", g.u0}, {"v0", g.v0}, {"hu", g.hu}, {"hv", g.hv}}},
           {"metric", matrix_rows(chart.metric)},
           {"frame", matrix_rows(chart.frame)},
           {"points", vector_rows(mesh_positions(surface))}};
    if (surface.kind.is_quadric()) s["quadric"] = vector_rows(surface.quadric);
    if (data) {
        s["shape"] = matrix_rows(data->shape);
        if (data->has_group_fields()) {
            json t = json::array();
            for (const auto& ti : data->t) t.push_back({ti[0](0), ti[0](1), ti[1](0), ti[1](1), ti[2](0), ti[2](1)});
            s["t"] = t;
            s["nu"] = vector_rows(data->nu);
        }
    }
    if (field) {
        json v = json::array();
        for (const auto& m : field->values) {
            json r = json::array();
            for (int b = 0; b < m.size(); ++b) r.push_back(m[static_cast<Blade>(b)]);
            v.push_back(std::move(r));
        }
        s["spinor"] = v;
    }
    return s;
}

ExportFormat export_format(const std::string& name) {
    if (name == "obj") return ExportFormat::obj;
    if (name == "ply") return ExportFormat::ply;
    if (name == "csv") return ExportFormat::csv;
    if (name == "json") return ExportFormat::json;
    throw std::invalid_argument("unknown export format '" + name + "' (obj, ply, csv, json)");
}

std::vector<std::string> export_scene(const json& scene, ExportFormat format, const std::string& dir) {
    const Grid g = grid_of(scene);
    const std::vector<Eigen::Vector3d> pts = points_of(scene, g);
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    const bool quadric = scene.contains("quadric");
    switch (format) {
        case ExportFormat::obj:
            written.push_back(open_write(dir, "surface.obj", [&](std::ostream& o) { write_obj(o, g, pts); }));
            break;
        case ExportFormat::ply:
            written.push_back(open_write(dir, "surface.ply", [&](std::ostream& o) { write_ply(o, g, pts); }));
            break;
        case ExportFormat::csv:
            written.push_back(open_write(dir, "surface.csv", [&](std::ostream& o) {
                o << "i,j,x,y,z\n";
                std::ostringstream line;
                line.precision(17);
                for (int j = 0; j < g.nv; ++j)
                    for (int i = 0; i < g.nu; ++i) {
                        const Eigen::Vector3d& p = pts[g.index(i, j)];
                        line.str("");
                        line << i << ',' << j << ',' << p(0) << ',' << p(1) << ',' << p(2) << '\n';
                        o << line.str();
                    }
            }));
            break;
        case ExportFormat::json:
            written.push_back(open_write(dir, "surface.json", [&](std::ostream& o) {
                json faces = json::array();
                for (int j = 0; j + 1 < g.nv; ++j)
                    for (int i = 0; i + 1 < g.nu; ++i) {
                        const auto a = g.index(i, j), b = g.index(i + 1, j), c = g.index(i + 1, j + 1), d = g.index(i, j + 1);
                        faces.push_back({a, b, c});
                        faces.push_back({a, c, d});
                    }
                o << json{{"grid", scene["grid"]}, {"vertices", scene["points"]}, {"faces", faces}}.dump(1) << '\n';
            }));
            break;
    }
    if (quadric && format != ExportFormat::json)
        written.push_back(open_write(dir, "surface_r4.csv", [&](std::ostream& o) { write_quadric_csv(o, scene["quadric"], g); }));
    return written;
}

}  // namespace spinsurf
