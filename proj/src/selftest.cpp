#include "spinsurf/selftest.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "spinsurf/clifford.hpp"
#include "spinsurf/metric_lie_group.hpp"
#include "spinsurf/spinor_field.hpp"
#include "spinsurf/surface_chart.hpp"

namespace spinsurf {

using nlohmann::json;

namespace {

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    Multivector mv(const Signature& s) {
        Multivector m(s);
        for (int b = 0; b < s.size(); ++b) m[static_cast<Blade>(b)] = unit_(rng_);
        return m;
    }
    Multivector vec(const Signature& s) { return mv(s).grade(1); }
    // Product of rotations and boosts in every coordinate plane.
    Multivector spin(const Signature& s) {
        Multivector g = Multivector::scalar(s, 1.0);
        for (int i = 0; i < s.dim(); ++i)
            for (int j = i + 1; j < s.dim(); ++j) {
                const double t = unit_(rng_);
                const bool compact = s.metric(i) == s.metric(j);
                const double c = compact ? std::cos(t) : std::cosh(t), sn = compact ? std::sin(t) : std::sinh(t);
                g = g * (Multivector::scalar(s, c) + sn * Multivector::blade(s, (1u << i) | (1u << j)));
            }
        return g;
    }
    // Metric-skew operator G K with K antisymmetric.
    SkewOperator skew(const Signature& s) {
        const int n = s.dim();
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                k(i, j) = unit_(rng_);
                k(j, i) = -k(i, j);
            }
        for (int i = 0; i < n; ++i) k.row(i) *= s.metric(i);
        return SkewOperator{s, k};
    }
    double real() { return unit_(rng_); }

private:
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unit_{-1.0, 1.0};
};

const std::vector<Signature>& sweep_signatures() {
    static const std::vector<Signature> sigs{Signature(0, 2), Signature(1, 1), Signature(1, 2), Signature(0, 3),
                                             Signature(1, 3), Signature(2, 2)};
    return sigs;
}

constexpr double exact_tier = 1e-12;

SuiteResult sweep(const std::string& name, int samples, const std::function<double()>& one) {
    SuiteResult r{name, static_cast<std::size_t>(samples), 0.0, exact_tier, false};
    for (int k = 0; k < samples; ++k) r.max_residual = std::max(r.max_residual, one());
    r.pass = r.max_residual <= r.limit;
    return r;
}

double vector_inner(const Signature& s, const Multivector& v, const Multivector& w) {
    double r = 0;
    for (int i = 0; i < s.dim(); ++i) r += s.metric(i) * v[1u << i] * w[1u << i];
    return r;
}

SuiteResult skew_bivector_suite(Sampler& rng, int samples) {
    return sweep("skew_bivector", samples, [&] {
        double m = 0;
        for (const auto& s : sweep_signatures()) {
            const SkewOperator u = rng.skew(s);
            const Multivector b = skew_to_bivector(u);
            const Multivector xi = rng.vec(s);
            const Eigen::VectorXd image = u.matrix * xi.vector_part();
            m = std::max(m, max_abs_diff(commutator(b, xi), Multivector::vector(s, std::span<const double>(image.data(), image.size()))));
        }
        return m;
    });
}

// Gamma_ij^k in one-based indices.
using Entry = std::tuple<int, int, int, double>;

std::vector<Entry> closed_form_table(const SpaceKind& k) {
    switch (k.tag) {
        case SpaceTag::algebra_a:
        case SpaceTag::product_h2xr:
            return {{2, 1, 2, -k.alpha}, {2, 2, 1, k.alpha}};
        case SpaceTag::algebra_b:
        case SpaceTag::product_rxs12:
            return {{1, 1, 3, -k.alpha}, {1, 3, 1, k.alpha}};
        case SpaceTag::algebra_c:
        case SpaceTag::product_rxh12:
            return {{3, 1, 3, k.delta}, {3, 3, 1, -k.delta}};
        case SpaceTag::lkt:
        case SpaceTag::su12: {
            const double t = k.tau, sg = k.sigma();
            return {{2, 1, 3, t}, {1, 3, 2, t}, {1, 2, 3, -t}, {2, 3, 1, -t}, {3, 1, 2, sg + t}, {3, 2, 1, -sg - t}};
        }
        default:
            return {};
    }
}

std::vector<SpaceKind> catalog_kinds() {
    return {SpaceKind::minkowski(),       SpaceKind::algebra_a(0.7),    SpaceKind::algebra_b(-1.3),   SpaceKind::algebra_c(0.4),
            SpaceKind::lkt(1.5, 0.6),     SpaceKind::lkt(-4, 1),        SpaceKind::su12(),            SpaceKind::product_h2xr(1.0),
            SpaceKind::product_rxs12(1.0), SpaceKind::product_rxh12(1.0), SpaceKind::euclidean3()};
}

SuiteResult flat_solve_suite() {
    const ChartBundle b = build_chart("plane", SpaceKind::minkowski(), {}, 9, 9);
    const GeometryData d = extract_geometry(b.immersion, b.chart);
    const KillingEquation eq = make_equation(KillingForm::extrinsic_group, SpaceKind::minkowski(), d);
    const SpinorField lift = frame_lift(b.chart, d);
    const KillingSolution sol = solve_killing(eq, b.chart, lift.values[b.chart.grid.index(4, 4)]);
    SuiteResult r{"flat_solve", 81, 0.0, 1e-11, false};
    r.max_residual = std::max({residual_killing(eq, sol.field).max_interior, sol.integrability, field_distance(lift, sol.field)});
    r.pass = r.max_residual <= r.limit;
    return r;
}

json suites_body(std::uint64_t seed) {
    json suites = json::array();
    bool pass = true;
    auto add = [&](const SuiteResult& r) {
        suites.push_back(suite_json(r));
        pass = pass && r.pass;
    };
    for (const auto& r : algebra_suites(seed)) add(r);
    for (const auto& r : catalog_suites()) add(r);
    add(mutation_suite(seed));
    add(flat_solve_suite());
    return json{{"seed", seed}, {"suites", suites}, {"pass", pass}};
}

}  // namespace

json suite_json(const SuiteResult& r) {
    return json{{"name", r.name}, {"samples", r.samples}, {"max_residual", r.max_residual}, {"limit", r.limit}, {"pass", r.pass}};
}

std::vector<SuiteResult> algebra_suites(std::uint64_t seed, int samples) {
    Sampler rng(seed);
    std::vector<SuiteResult> out;
    out.push_back(sweep("associativity", samples, [&] {
        double m = 0;
        for (const auto& s : sweep_signatures()) {
            const auto a = rng.mv(s), b = rng.mv(s), c = rng.mv(s);
            m = std::max(m, max_abs_diff((a * b) * c, a * (b * c)));
        }
        return m;
    }));
    out.push_back(sweep("clifford_relation", samples, [&] {
        double m = 0;
        for (const auto& s : sweep_signatures()) {
            const auto v = rng.vec(s), w = rng.vec(s);
            m = std::max(m, max_abs_diff(v * w + w * v, Multivector::scalar(s, -2 * vector_inner(s, v, w))));
        }
        return m;
    }));
    out.push_back(sweep("reversal", samples, [&] {
        double m = 0;
        for (const auto& s : sweep_signatures()) {
            const auto a = rng.mv(s), b = rng.mv(s);
            m = std::max({m, max_abs_diff(mv_tau(a * b), mv_tau(b) * mv_tau(a)), max_abs_diff(mv_tau(mv_tau(a)), a)});
            // grade k picks up (-1)^{k(k-1)/2}
            for (int k = 0; k <= s.dim(); ++k) {
                const double sign = (k * (k - 1) / 2) % 2 ? -1.0 : 1.0;
                m = std::max(m, max_abs_diff(mv_tau(a.grade(k)), sign * a.grade(k)));
            }
        }
        return m;
    }));
    out.push_back(sweep("pairing_symmetry", samples, [&] {
        double m = 0;
        for (const auto& s : sweep_signatures()) {
            const auto v = rng.mv(s), w = rng.mv(s);
            m = std::max(m, max_abs_diff(spin_product(v, w), mv_tau(spin_product(w, v))));
        }
        return m;
    }));
    out.push_back(sweep("pairing_vector_adjoint", samples, [&] {
        double m = 0;
        for (const auto& s : sweep_signatures()) {
            const auto v = rng.mv(s), w = rng.mv(s), x = rng.vec(s);
            m = std::max(m, max_abs_diff(spin_product(x * v, w), spin_product(v, x * w)));
        }
        return m;
    }));
    out.push_back(sweep("spin_equivariance", samples, [&] {
        double m = 0;
        for (const auto& s : sweep_signatures()) {
            const auto g = rng.spin(s), v = rng.mv(s), w = rng.mv(s);
            m = std::max({m, max_abs_diff(spin_product(g * v, g * w), spin_product(v, w)),
                          max_abs_diff(spin_product(g, g), Multivector::scalar(s, 1.0))});
        }
        return m;
    }));
    out.push_back(skew_bivector_suite(rng, samples));
    out.push_back(sweep("quaternion_model", samples, [&] {
        const auto a = rng.mv(cl12::sig()), b = rng.mv(cl12::sig());
        return std::max((hc_iso(a * b) - hc_iso(a) * hc_iso(b)).max_abs(), max_abs_diff(hc_iso_inverse(hc_iso(a)), a));
    }));
    const Signature quat(0, 2);
    const Multivector quat_unit_i = star_map_inverse(cl12::quat_i(), StarCase::riemannian);
    out.push_back(sweep("star_spin_intertwining", samples, [&] {
        const double t = rng.real() * 3.14159;
        const auto g = Multivector::scalar(quat, std::cos(t)) + std::sin(t) * quat_unit_i;
        const auto g12 = Multivector::scalar(cl12::sig(), std::cos(t)) + std::sin(t) * cl12::quat_i();
        const auto q = rng.mv(quat);
        return max_abs_diff(star_map(g * q, StarCase::riemannian), g12 * star_map(q, StarCase::riemannian));
    }));
    out.push_back(sweep("star_clifford_action", samples, [&] {
        const auto q = rng.mv(quat);
        const auto x = rng.vec(quat);
        const auto x12 = x[1] * cl12::e(1) + x[2] * cl12::e(2);
        const auto fq = star_map(q, StarCase::riemannian);
        double m = max_abs_diff(star_map(x * q, StarCase::riemannian), cl12::e(0) * x12 * fq * cl12::quat_i());
        const Signature lor(1, 1);
        const auto p = rng.mv(lor);
        const auto y = rng.vec(lor);
        const auto y12 = y[1] * cl12::e(0) + y[2] * cl12::e(1);
        m = std::max(m, max_abs_diff(star_map(y * p, StarCase::lorentzian), y12 * cl12::e(2) * star_map(p, StarCase::lorentzian)));
        return m;
    }));
    return out;
}

std::vector<SuiteResult> catalog_suites() {
    std::vector<SuiteResult> out;
    for (const auto& k : catalog_kinds()) {
        const LieAlgebra3 a = make_algebra(k);
        const std::string tag = k.name();
        auto single = [&](const std::string& what, double value, double limit) {
            out.push_back(SuiteResult{tag + ":" + what, 1, value, limit, value <= limit});
        };
        single("jacobi", a.jacobi_residual(), exact_tier);
        single("torsion", a.torsion_residual(), 1e-14);
        single("metric", a.metric_residual(), 1e-14);
        Tensor3 expected{};
        for (const auto& [i, j, kk, v] : closed_form_table(k)) expected[t3(i - 1, j - 1, kk - 1)] = v;
        double table = 0;
        for (std::size_t n = 0; n < expected.size(); ++n) table = std::max(table, std::abs(a.gamma[n] - expected[n]));
        single("gamma_table", table, 1e-15);
    }
    // sigma + 2 tau = 0 at kappa = -4, tau = 1
    const SpaceKind su = SpaceKind::lkt(-4, 1);
    out.push_back(SuiteResult{"lkt(-4,1):collapse", 1, std::abs(su.sigma() + 2 * su.tau), 0.0, su.sigma() + 2 * su.tau == 0.0});
    return out;
}

SuiteResult mutation_suite(std::uint64_t seed) {
    Sampler rng(seed);
    SuiteResult faulted;
    {
        // e0 e1 in every signature
        ProductSignFault fault(1, 2);
        faulted = skew_bivector_suite(rng, 50);
    }
    return SuiteResult{"mutation:skew_bivector_detects_fault", faulted.samples, faulted.max_residual, exact_tier, !faulted.pass};
}

json selftest_report(std::uint64_t seed) {
    json first = suites_body(seed);
    const json second = suites_body(seed);
    const bool same = first.dump() == second.dump();
    first["suites"].push_back(suite_json(SuiteResult{"determinism", 2, same ? 0.0 : 1.0, 0.0, same}));
    first["pass"] = first["pass"].get<bool>() && same;
    return first;
}

}  // namespace spinsurf
