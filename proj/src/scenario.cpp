#include "spinsurf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "spinsurf/correspondence.hpp"
#include "spinsurf/immersion_reconstruct.hpp"
#include "spinsurf/scene.hpp"

namespace spinsurf {

using nlohmann::json;

namespace {

const std::vector<std::string>& pipelines() {
    static const std::vector<std::string> names{"verify", "solve", "reconstruct", "correspond-lawson", "correspond-calabi",
                                                "correspond-weierstrass", "dirac-killing"};
    return names;
}

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

double number(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + "." + key + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + "." + key + " must be finite");
    return v;
}

int integer(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return j.get<int>();
}

std::string text(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + "." + key + " must be a string");
    return j.get<std::string>();
}

int level_n(const Scenario& s, int k) { return (s.n - 1) * (1 << k) + 1; }

std::size_t centre(const Grid& g) { return g.index(g.nu / 2, g.nv / 2); }

double order_of(double coarse, double fine) { return std::log2(coarse / fine); }

// Accumulates per-level metrics and named checks.
class Study {
public:
    explicit Study(const Tolerances& tol) : tol_(tol) {}

    json& level(int n, double h) {
        levels_.push_back(json{{"n", n}, {"h", h}});
        return levels_.back();
    }
    void metric(const std::string& name, double v) {
        levels_.back()[name] = v;
        series_[name].push_back(v);
    }
    const std::vector<double>& series(const std::string& name) const { return series_.at(name); }

    void at_most(const std::string& name, double value, double limit) { add(name, value, limit, value <= limit, "max"); }
    void at_least(const std::string& name, double value, double limit) { add(name, value, limit, value >= limit, "min"); }
    // Observed order between the two finest levels; a finest value below the
    // exactness floor passes outright.
    void order(const std::string& name) {
        const auto& v = series_.at(name);
        if (v.size() < 2) return;
        if (v.back() <= tol_.exact) {
            add("order:" + name, v.back(), tol_.exact, true, "exact");
            return;
        }
        const double o = order_of(v[v.size() - 2], v.back());
        add("order:" + name, o, tol_.min_order, o >= tol_.min_order, "min");
    }

    json report() const {
        bool pass = true;
        for (const auto& c : checks_) pass = pass && c["pass"].get<bool>();
        return json{{"levels", levels_}, {"checks", checks_}, {"pass", pass}};
    }

private:
    void add(const std::string& name, double value, double limit, bool ok, const char* kind) {
        checks_.push_back(json{{"name", name}, {"value", value}, {"limit", limit}, {"kind", kind}, {"pass", ok}});
    }

    Tolerances tol_;
    std::vector<json> levels_;
    std::vector<json> checks_;
    std::map<std::string, std::vector<double>> series_;
};

struct Level {
    ChartBundle bundle;
    GeometryData data;
};

// `chart_kind` hosts the family when the equation's space has no immersed
// sample of its own (intrinsic data only needs the metric).
Level prepare(const Scenario& s, int n, const SpaceKind* chart_kind = nullptr) {
    Level l{build_chart(s.family, chart_kind ? *chart_kind : s.space, s.params, n, n), {}};
    if (s.shape_scale) {
        const double c = *s.shape_scale;
        l.data = prescribed_shape(l.bundle.chart, s.space, [c](std::size_t) { return Eigen::Matrix2d(c * Eigen::Matrix2d::Identity()); });
    } else {
        l.data = extract_geometry(l.bundle.immersion, l.bundle.chart);
    }
    return l;
}

KillingForm require_form(const Scenario& s) {
    if (!s.form) throw ConfigError("pipeline " + s.pipeline + " needs a Killing form");
    return *s.form;
}

Multivector initial_spinor(const KillingEquation& eq, const Level& l) {
    if (eq.model() == SpinorModel::intrinsic) return Multivector::scalar(eq.space.algebra(), 1.0);
    // the extrinsic constant spinor read at the base node fixes the gauge
    return frame_lift(l.bundle.chart, extract_geometry(l.bundle.immersion, l.bundle.chart)).values[centre(l.bundle.chart.grid)];
}

void run_verify(const Scenario& s, Study& st, ScenarioResult& out) {
    for (int k = 0; k < s.refinements; ++k) {
        const int n = level_n(s, k);
        const Level l = prepare(s, n);
        st.level(n, l.bundle.chart.grid.hu);
        // the Gauss-Codazzi system is tabulated for group kinds only
        if (s.space.is_group()) st.metric("compatibility", check_compatibility(l.bundle.chart, s.space, l.data).max_residual());
        if (s.form) {
            const KillingEquation eq = make_equation(*s.form, s.space, l.data, s.tau);
            st.metric("killing", residual_killing(eq, frame_lift(l.bundle.chart, l.data)).max_interior);
        }
        if (k + 1 == s.refinements) out.scene = scene_json(s.name, l.bundle.chart, &l.data, l.bundle.immersion);
    }
    if (s.space.is_group()) st.order("compatibility");
    if (s.form) st.order("killing");
}

void run_solve(const Scenario& s, Study& st, ScenarioResult& out, bool rebuild) {
    const KillingForm form = require_form(s);
    for (int k = 0; k < s.refinements; ++k) {
        const int n = level_n(s, k);
        const Level l = prepare(s, n);
        const Chart& chart = l.bundle.chart;
        const KillingEquation eq = make_equation(form, s.space, l.data, s.tau);
        const KillingSolution sol = solve_killing(eq, chart, initial_spinor(eq, l));
        st.level(n, chart.grid.hu);
        const double residual = residual_killing(eq, sol.field).max_interior;
        st.metric("residual", residual);
        st.metric("plaquette", sol.integrability);
        st.metric("unit_drift", sol.unit_drift);
        if (!rebuild) {
            if (k + 1 == s.refinements) out.scene = scene_json(s.name, chart, &l.data, l.bundle.immersion, &sol.field);
            continue;
        }

        ReconstructOptions opt;
        opt.data = &l.data;
        opt.residual = residual;
        if (s.space.is_quadric()) opt.time = l.bundle.immersion.quadric[0](0);
        const Reconstruction rec = reconstruct(s.space, sol.field, opt);
        const ImmersionField placed =
            s.space.is_group() ? align_to(rec.immersion, l.bundle.immersion, chart, centre(chart.grid)) : rec.immersion;
        st.metric("error", immersion_distance(placed, l.bundle.immersion));
        st.metric("xi", xi_defect(rec.immersion, rec.xi).max_interior);
        if (rec.xi.explicit_defect >= 0) st.metric("explicit", rec.xi.explicit_defect);
        if (s.space.is_quadric()) {
            const ImmersionReport rep = verify_immersion(rec.immersion, chart, l.data);
            st.metric("containment", rep.get("containment").max_interior);
            st.metric("orthogonality", rec.orthogonality);
            if (s.space.tag == SpaceTag::product_rminus_s2) st.metric("e0_deviation", rec.e0_deviation);
        } else {
            st.metric("darboux", rec.integrability);
        }
        if (k + 1 == s.refinements) out.scene = scene_json(s.name, chart, &l.data, placed, &sol.field);
    }
    st.order("residual");
    st.order("plaquette");
    st.at_most("unit_drift", st.series("unit_drift").back(), s.tol.unit);
    if (!rebuild) return;
    st.order("error");
    st.order("xi");
    if (!s.space.is_quadric()) {
        const auto& e = st.series("explicit");
        st.at_most("explicit", *std::max_element(e.begin(), e.end()), s.tol.algebraic);
    } else {
        const auto& c = st.series("containment");
        st.at_most("containment", *std::max_element(c.begin(), c.end()), s.tol.algebraic);
        if (s.space.tag == SpaceTag::product_rminus_s2) st.order("e0_deviation");
    }
}

void run_lawson(const Scenario& s, Study& st, json& extra) {
    if (s.space.tag != SpaceTag::minkowski_r12) throw ConfigError("correspond-lawson runs in minkowski_r12");
    if (!s.shape_scale) throw ConfigError("correspond-lawson needs shape_scale (S = H_1 id)");
    const double h1 = *s.shape_scale;
    for (int k = 0; k < s.refinements; ++k) {
        const int n = level_n(s, k);
        const Level l = prepare(s, n);
        const KillingEquation eq = make_equation(KillingForm::r12_riemannian, s.space, l.data);
        const CmcPair in{solve_killing(eq, l.bundle.chart, Multivector::scalar(cl12::sig(), 1.0)).field, h1, CmcTarget::r12};
        const LawsonResult out = lawson_rotate(in, s.branch);
        st.level(n, l.bundle.chart.grid.hu);
        const double r = cmc_dirac_residual(in).max_interior, r2 = cmc_dirac_residual(out.pair).max_interior;
        st.metric("input_residual", r);
        st.metric("output_residual", r2);
        double drift = 0;
        for (std::size_t i = 0; i < in.field.size(); ++i)
            drift = std::max(drift, std::abs(indicator(out.pair.field.values[i]) - indicator(in.field.values[i])));
        st.metric("indicator_drift", drift);
        st.at_most("ratio@" + std::to_string(n), r > 0 ? r2 / r : 0.0, s.tol.ratio);
        st.at_most("indicator@" + std::to_string(n), drift, s.tol.indicator);
        extra = json{{"H1", h1}, {"H2", out.pair.mean}, {"theta", out.theta}, {"branch", s.branch}};
        if (k + 1 == s.refinements)
            st.at_most("H2", std::abs(out.pair.mean - s.branch * std::sqrt(h1 * h1 - 1)), s.tol.algebraic);
    }
}

void run_calabi(const Scenario& s, Study& st) {
    if (s.space.tag != SpaceTag::euclidean3) throw ConfigError("correspond-calabi starts from euclidean3");
    for (int k = 0; k < s.refinements; ++k) {
        const int n = level_n(s, k);
        const Level l = prepare(s, n);
        const KillingEquation eq = make_equation(KillingForm::r3_euclidean, s.space, l.data);
        const SpinorField psi1 = solve_killing(eq, l.bundle.chart, Multivector::scalar(cl12::sig(), 1.0)).field;
        const CalabiResult c = calabi_map(l.bundle.chart, psi1);
        st.level(n, l.bundle.chart.grid.hu);
        st.metric("input_dirac", c.input_dirac);
        st.metric("output_dirac", cmc_dirac_residual({c.field, 0.0, CmcTarget::r12}).max_interior);
        st.metric("indicator_defect", indicator_defect(c.field));
        st.metric("min_indicator", c.min_indicator);
        st.metric("mean_curvature",
                  dirac_killing_roundtrip(c.field, std::vector<double>(c.field.size(), 0.0), 0.0).trace_defect);
    }
    st.order("output_dirac");
    st.order("mean_curvature");
    const auto& d = st.series("indicator_defect");
    st.at_most("indicator_defect", *std::max_element(d.begin(), d.end()), s.tol.algebraic);
}

void run_weierstrass(const Scenario& s, Study& st, ScenarioResult& out, json& extra) {
    std::array<double, 4> box{0.5, 1.0, 0.0, 1.2};
    if (s.weierstrass == "enneper") box = {-0.5, 0.5, -0.5, 0.5};
    else if (s.weierstrass == "plane") box = {-1, 1, -1, 1};
    const char* keys[] = {"u0", "u1", "v0", "v1"};
    for (std::size_t i = 0; i < 4; ++i)
        if (auto it = s.params.find(keys[i]); it != s.params.end()) box[i] = it->second;
    for (int k = 0; k < s.refinements; ++k) {
        const int n = level_n(s, k);
        const Grid g = Grid::over(n, n, box[0], box[1], box[2], box[3]);
        const WeierstrassData e = weierstrass_sample(s.weierstrass, g);
        const WeierstrassData l = weierstrass_transform(e, s.tol.algebraic);
        const WeierstrassSurface surf = weierstrass_surface(l);
        const GeometryData d = extract_geometry(surf.immersion, surf.chart);
        double h = 0;
        for (int j = 1; j + 1 < n; ++j)
            for (int i = 1; i + 1 < n; ++i) h = std::max(h, std::abs(d.mean[g.index(i, j)]));
        st.level(n, g.hu);
        st.metric("mean_curvature", h);
        st.metric("constant", h / (g.hu * g.hu));
        st.metric("conformality", l.conformality_defect());
        st.metric("path_defect", surf.path_defect);

        // applying the transform twice is a half turn about the third axis
        const WeierstrassSurface a = weierstrass_surface(e), b = weierstrass_surface(weierstrass_transform(l, s.tol.algebraic));
        const GroupModel model(SpaceKind::euclidean3());
        ImmersionField turned = b.immersion;
        for (auto& p : turned.group) {
            const Eigen::Vector3d x = model.position(p);
            p = model.mul_exp(model.identity(), Eigen::Vector3d(-x(0), -x(1), x(2)), 1.0);
        }
        st.metric("involution", immersion_distance(turned, a.immersion));
        if (k + 1 == s.refinements) {
            out.scene = scene_json(s.name, surf.chart, nullptr, surf.immersion);
            extra = json{{"constant", h / (g.hu * g.hu)}};
        }
    }
    st.order("mean_curvature");
    for (const char* m : {"conformality", "involution"}) {
        const auto& v = st.series(m);
        st.at_most(m, *std::max_element(v.begin(), v.end()), s.tol.algebraic);
    }
}

void run_dirac_killing(const Scenario& s, Study& st) {
    if (!s.shape_scale) throw ConfigError("dirac-killing needs shape_scale (S = scale id)");
    const double lambda = *s.shape_scale;
    const KillingForm form = s.tau == 0 ? KillingForm::r12_riemannian : KillingForm::killing_lkt;
    const SpaceKind host = SpaceKind::minkowski();
    for (int k = 0; k < s.refinements; ++k) {
        const int n = level_n(s, k);
        const Level l = prepare(s, n, &host);
        const KillingEquation eq = make_equation(form, s.space, l.data, s.tau);
        const SpinorField f = solve_killing(eq, l.bundle.chart, Multivector::scalar(cl12::sig(), 1.0)).field;
        const RoundTripReport r = dirac_killing_roundtrip(f, std::vector<double>(f.size(), lambda), s.tau, l.data.shape);
        st.level(n, l.bundle.chart.grid.hu);
        st.metric("dirac", r.dirac_residual);
        st.metric("killing", r.killing_residual);
        st.metric("recovered_killing", r.recovered_killing);
        st.metric("symmetry", r.symmetry_defect);
        st.metric("trace", r.trace_defect);
        st.metric("shape", r.shape_defect);
        st.at_most("ratio@" + std::to_string(n), r.ratio, s.tol.ratio);
    }
    for (const char* m : {"dirac", "killing", "recovered_killing", "symmetry", "trace"}) st.order(m);
}

json params_json(const FamilyParams& p) {
    json j = json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

}  // namespace

std::vector<std::string> pipeline_names() { return pipelines(); }

Scenario parse_scenario(const json& j) {
    require_keys(j, {"name", "space", "family", "grid", "pipeline", "form", "shape_scale", "tau", "branch", "weierstrass", "tolerances"},
                 "scenario");
    Scenario s;
    if (!j.contains("name")) throw ConfigError("scenario needs a name");
    s.name = text(j["name"], "name", "scenario");
    if (s.name.empty() || s.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") != std::string::npos)
        throw ConfigError("scenario.name must be a nonempty [A-Za-z0-9_-] identifier");

    if (!j.contains("pipeline")) throw ConfigError("scenario needs a pipeline");
    s.pipeline = text(j["pipeline"], "pipeline", "scenario");
    if (std::find(pipelines().begin(), pipelines().end(), s.pipeline) == pipelines().end())
        throw ConfigError("unknown pipeline '" + s.pipeline + "'");

    if (!j.contains("space")) throw ConfigError("scenario needs a space");
    const json& sp = j["space"];
    std::string space_name;
    double alpha = 0, delta = 0, kappa = 0, tau_space = 0;
    if (sp.is_string()) {
        space_name = sp.get<std::string>();
    } else {
        require_keys(sp, {"name", "alpha", "delta", "kappa", "tau"}, "space");
        if (!sp.contains("name")) throw ConfigError("space needs a name");
        space_name = text(sp["name"], "name", "space");
        if (sp.contains("alpha")) alpha = number(sp["alpha"], "alpha", "space");
        if (sp.contains("delta")) delta = number(sp["delta"], "delta", "space");
        if (sp.contains("kappa")) kappa = number(sp["kappa"], "kappa", "space");
        if (sp.contains("tau")) tau_space = number(sp["tau"], "tau", "space");
    }
    try {
        s.space = space_from_name(space_name, alpha, delta, kappa, tau_space);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("space: ") + e.what());
    }

    if (j.contains("family")) {
        const json& f = j["family"];
        if (f.is_string()) {
            s.family = f.get<std::string>();
        } else {
            require_keys(f, {"name", "params"}, "family");
            if (!f.contains("name")) throw ConfigError("family needs a name");
            s.family = text(f["name"], "name", "family");
            if (f.contains("params")) {
                if (!f["params"].is_object()) throw ConfigError("family.params must be an object");
                for (const auto& [k, v] : f["params"].items()) s.params[k] = number(v, k, "family.params");
            }
        }
        const auto names = family_names();
        if (std::find(names.begin(), names.end(), s.family) == names.end()) throw ConfigError("unknown family '" + s.family + "'");
    } else if (s.pipeline != "correspond-weierstrass") {
        throw ConfigError("scenario needs a family");
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        require_keys(g, {"n", "refinements"}, "grid");
        if (g.contains("n")) s.n = integer(g["n"], "n", "grid");
        if (g.contains("refinements")) s.refinements = integer(g["refinements"], "refinements", "grid");
    }
    if (s.n < 8) throw ConfigError("grid.n must be at least 8");
    if (s.refinements < 1 || s.refinements > 4) throw ConfigError("grid.refinements must be in 1..4");
    if (level_n(s, s.refinements - 1) > 257) throw ConfigError("finest grid exceeds 257 nodes per direction");

    if (j.contains("form")) {
        try {
            s.form = form_from_name(text(j["form"], "form", "scenario"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("form: ") + e.what());
        }
    }
    if (j.contains("shape_scale")) s.shape_scale = number(j["shape_scale"], "shape_scale", "scenario");
    if (j.contains("tau")) s.tau = number(j["tau"], "tau", "scenario");
    if (j.contains("branch")) {
        s.branch = integer(j["branch"], "branch", "scenario");
        if (s.branch != 1 && s.branch != -1) throw ConfigError("branch must be +1 or -1");
    }
    if (j.contains("weierstrass")) {
        s.weierstrass = text(j["weierstrass"], "weierstrass", "scenario");
        if (s.weierstrass != "catenoid" && s.weierstrass != "enneper" && s.weierstrass != "plane")
            throw ConfigError("weierstrass must be catenoid, enneper or plane");
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        require_keys(t, {"min_order", "unit", "algebraic", "ratio", "exact", "indicator"}, "tolerances");
        const std::pair<const char*, double*> fields[] = {{"min_order", &s.tol.min_order}, {"unit", &s.tol.unit},
                                                          {"algebraic", &s.tol.algebraic}, {"ratio", &s.tol.ratio},
                                                          {"exact", &s.tol.exact},         {"indicator", &s.tol.indicator}};
        for (const auto& [k, p] : fields)
            if (t.contains(k)) *p = number(t[k], k, "tolerances");
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return parse_scenario(j);
}

json scenario_to_json(const Scenario& s) {
    json j{{"name", s.name},
           {"space", {{"name", s.space.name()}, {"alpha", s.space.alpha}, {"delta", s.space.delta}, {"kappa", s.space.kappa}, {"tau", s.space.tau}}},
           {"grid", {{"n", s.n}, {"refinements", s.refinements}}},
           {"pipeline", s.pipeline},
           {"tau", s.tau},
           {"branch", s.branch},
           {"tolerances",
            {{"min_order", s.tol.min_order}, {"unit", s.tol.unit}, {"algebraic", s.tol.algebraic}, {"ratio", s.tol.ratio},
             {"exact", s.tol.exact}, {"indicator", s.tol.indicator}}}};
    if (!s.family.empty()) j["family"] = {{"name", s.family}, {"params", params_json(s.params)}};
    if (s.form) j["form"] = form_name(*s.form);
    if (s.shape_scale) j["shape_scale"] = *s.shape_scale;
    if (s.pipeline == "correspond-weierstrass") j["weierstrass"] = s.weierstrass;
    return j;
}

namespace {

// Unsupported space/family/form combinations surface on a minimal chart,
// before any refinement level is computed.
void check_pairing(const Scenario& s) {
    if (s.pipeline == "correspond-weierstrass") return;
    const SpaceKind host = s.pipeline == "dirac-killing" ? SpaceKind::minkowski() : s.space;
    try {
        const ChartBundle b = build_chart(s.family, host, s.params, 8, 8);
        if (s.form && (s.pipeline == "verify" || s.pipeline == "solve" || s.pipeline == "reconstruct"))
            make_equation(*s.form, s.space, extract_geometry(b.immersion, b.chart), s.tau);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("unsupported pairing: ") + e.what());
    }
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s) {
    check_pairing(s);
    ScenarioResult out;
    Study st(s.tol);
    json extra = json::object();
    if (s.pipeline == "verify") run_verify(s, st, out);
    else if (s.pipeline == "solve") run_solve(s, st, out, false);
    else if (s.pipeline == "reconstruct") run_solve(s, st, out, true);
    else if (s.pipeline == "correspond-lawson") run_lawson(s, st, extra);
    else if (s.pipeline == "correspond-calabi") run_calabi(s, st);
    else if (s.pipeline == "correspond-weierstrass") run_weierstrass(s, st, out, extra);
    else if (s.pipeline == "dirac-killing") run_dirac_killing(s, st);
    else throw ConfigError("unknown pipeline '" + s.pipeline + "'");
    out.report = st.report();
    out.report["scenario"] = scenario_to_json(s);
    out.report["extra"] = extra;
    out.pass = out.report["pass"].get<bool>();
    return out;
}

std::string report_text(const json& report) { return report.dump(2) + "\n"; }

}  // namespace spinsurf
