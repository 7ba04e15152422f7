#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinsurf/metric_lie_group.hpp"
#include "spinsurf/scenario.hpp"
#include "spinsurf/scene.hpp"
#include "spinsurf/selftest.hpp"
#include "spinsurf/spinor_field.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spinsurf;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_config = 2;

std::string output_root() {
    const char* env = std::getenv("SPINSURF_OUT");
    return env && *env ? env : "spinsurf_out";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// n,h and every metric of each level, one row per level.
std::string metrics_csv(const json& report) {
    std::vector<std::string> cols;
    for (const auto& lvl : report["levels"])
        for (const auto& [k, v] : lvl.items())
            if (k != "n" && k != "h" && std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    std::ostringstream out;
    out.precision(17);
    out << "n,h";
    for (const auto& c : cols) out << ',' << c;
    out << '\n';
    for (const auto& lvl : report["levels"]) {
        out << lvl["n"].get<int>() << ',' << lvl["h"].get<double>();
        for (const auto& c : cols) {
            out << ',';
            if (lvl.contains(c)) out << lvl[c].get<double>();
        }
        out << '\n';
    }
    return out.str();
}

int cmd_selftest(bool quiet) {
    const json report = selftest_report();
    if (!quiet) std::cout << report.dump(2) << '\n';
    return report["pass"].get<bool>() ? exit_pass : exit_fail;
}

int cmd_run(const std::string& path) {
    const Scenario s = load_scenario(path);
    const ScenarioResult r = run_scenario(s);
    const fs::path dir = fs::path(output_root()) / s.name;
    fs::create_directories(dir);
    write_text(dir / "report.json", report_text(r.report));
    write_text(dir / "metrics.csv", metrics_csv(r.report));
    if (r.scene) {
        write_text(dir / "scene.json", r.scene->dump() + "\n");
        export_scene(*r.scene, ExportFormat::obj, dir.string());
        export_scene(*r.scene, ExportFormat::ply, dir.string());
    }
    for (const auto& c : r.report["checks"])
        std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << " value=" << c["value"].dump()
                  << " limit=" << c["limit"].dump() << '\n';
    std::cout << (r.pass ? "PASS" : "FAIL") << ' ' << s.name << " -> " << (dir / "report.json").string() << '\n';
    return r.pass ? exit_pass : exit_fail;
}

int cmd_export(const std::string& path, const std::string& format, const std::string& out_dir) {
    const ExportFormat f = export_format(format);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scene file " + path);
    json scene;
    try {
        scene = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scene file " + path + " is not valid JSON: " + e.what());
    }
    const std::string dir = out_dir.empty() ? fs::path(path).parent_path().string() : out_dir;
    for (const auto& w : export_scene(scene, f, dir.empty() ? "." : dir)) std::cout << w << '\n';
    return exit_pass;
}

json table_json(const Tensor3& t) {
    json entries = json::array();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                if (t[t3(i, j, k)] != 0.0) entries.push_back({{"i", i + 1}, {"j", j + 1}, {"k", k + 1}, {"value", t[t3(i, j, k)]}});
    return entries;
}

int cmd_catalog() {
    struct Sample {
        SpaceKind kind;
        const char* parameters;
    };
    const std::vector<Sample> samples{
        {SpaceKind::minkowski(), "none"},
        {SpaceKind::algebra_a(1.0), "alpha != 0"},
        {SpaceKind::algebra_b(1.0), "alpha != 0"},
        {SpaceKind::algebra_c(1.0), "delta != 0"},
        {SpaceKind::lkt(1.0, 1.0), "tau != 0, any kappa"},
        {SpaceKind::su12(), "kappa = -4, tau = 1"},
        {SpaceKind::product_h2xr(1.0), "alpha != 0"},
        {SpaceKind::product_rxs12(1.0), "alpha != 0"},
        {SpaceKind::product_rxh12(1.0), "delta != 0"},
        {SpaceKind::euclidean3(), "none (Riemannian, Calabi input only)"},
        {SpaceKind::de_sitter(), "none"},
        {SpaceKind::anti_de_sitter(), "none"},
        {SpaceKind::product_rminus_s2(), "none"},
    };
    json spaces = json::array();
    for (const auto& s : samples) {
        json e{{"name", s.kind.name()}, {"parameters", s.parameters}, {"group", s.kind.is_group()}};
        if (s.kind.is_group()) {
            const LieAlgebra3 a = make_algebra(s.kind);
            e["sample"] = {{"alpha", s.kind.alpha}, {"delta", s.kind.delta}, {"kappa", s.kind.kappa}, {"tau", s.kind.tau}};
            e["eps"] = a.eps;
            e["structure"] = table_json(a.c);
            e["gamma"] = table_json(a.gamma);
        }
        spaces.push_back(std::move(e));
    }
    json forms = json::array();
    for (int f = 0; f <= static_cast<int>(KillingForm::r3_euclidean); ++f) forms.push_back(form_name(static_cast<KillingForm>(f)));
    std::cout << json{{"spaces", spaces}, {"families", family_names()}, {"forms", forms}, {"pipelines", pipeline_names()}}.dump(2)
              << '\n';
    return exit_pass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spinsurf: spinor representation of surfaces in Lorentzian homogeneous 3-spaces"};
    app.require_subcommand(1);

    bool quiet = false;
    auto* selftest = app.add_subcommand("selftest", "run the algebraic invariant suites");
    selftest->add_flag("-q,--quiet", quiet, "print nothing, report through the exit code");

    std::string scenario;
    auto* run = app.add_subcommand("run", "run a scenario; writes $SPINSURF_OUT/<name>/report.json");
    run->add_option("scenario", scenario, "scenario JSON file")->required();

    std::string scene, format = "obj", out_dir;
    auto* exp = app.add_subcommand("export", "export the surface of a scene.json");
    exp->add_option("scene", scene, "scene JSON file")->required();
    exp->add_option("--format", format, "obj | ply | csv | json");
    exp->add_option("--out", out_dir, "output directory (default: next to the scene)");

    auto* catalog = app.add_subcommand("catalog", "print spaces, connection tables, families and forms as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_config;
    }

    try {
        if (selftest->parsed()) return cmd_selftest(quiet);
        if (run->parsed()) return cmd_run(scenario);
        if (exp->parsed()) return cmd_export(scene, format, out_dir);
        if (catalog->parsed()) return cmd_catalog();
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return exit_fail;
    }
    return exit_config;
}
