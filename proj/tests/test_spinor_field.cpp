#include <doctest.h>

#include <cmath>

#include "sample_data.hpp"
#include "spinsurf/spinor_field.hpp"

using namespace spinsurf;
using testutil::random_even;
using testutil::random_group_node;
using testutil::random_tangent;

namespace {

const Eigen::Vector2d e1(1, 0), e2(0, 1);

std::vector<SpaceKind> group_kinds() {
    return {SpaceKind::minkowski(),   SpaceKind::algebra_a(0.7),     SpaceKind::algebra_b(0.5),
            SpaceKind::algebra_c(0.8), SpaceKind::lkt(-1.0, 0.5),      SpaceKind::su12(),
            SpaceKind::product_h2xr(1.3), SpaceKind::product_rxs12(0.9), SpaceKind::product_rxh12(1.1)};
}

double max_sweep(KillingForm a, KillingForm b, const SpaceKind& kind, SurfaceSignature sig, std::uint64_t seed, int samples = 100) {
    std::mt19937_64 rng(seed);
    double worst = 0;
    for (int s = 0; s < samples; ++s) {
        const GeometryData d = random_group_node(kind, sig, rng);
        const KillingEquation ea = make_equation(a, kind, d), eb = make_equation(b, kind, d);
        const Multivector psi = random_even(cl12::sig(), rng);
        const Eigen::Vector2d x = random_tangent(rng);
        worst = std::max(worst, max_abs_diff(killing_rhs(ea, psi, 0, x), killing_rhs(eb, psi, 0, x)));
    }
    return worst;
}

}  // namespace

TEST_CASE("spinor: Clifford action is skew and isometric") {
    std::mt19937_64 rng(11);
    for (auto sig : {SurfaceSignature::riemannian, SurfaceSignature::lorentzian}) {
        const SpinorSpace s = intrinsic_space(sig);
        for (int n = 0; n < 200; ++n) {
            const Multivector p1 = random_even(cl12::sig(), rng), p2 = random_even(cl12::sig(), rng);
            const Eigen::Vector2d x = random_tangent(rng);
            CHECK(clifford_action(s, x, p1).odd().max_abs() == 0.0);
            if (sig == SurfaceSignature::riemannian) {
                CHECK(std::abs(hermitian_re(clifford_action(s, x, p1), p2) + hermitian_re(p1, clifford_action(s, x, p2))) <= 1e-12);
                const Eigen::Vector2d u = x.normalized();
                CHECK(std::abs(hermitian_re(clifford_action(s, u, p1), clifford_action(s, u, p2)) - hermitian_re(p1, p2)) <= 1e-12);
                // X.X = -|X|^2
                CHECK(max_abs_diff(clifford_action(s, x, clifford_action(s, x, p1)), -x.squaredNorm() * p1) <= 1e-12);
                CHECK(max_abs_diff(complex_i(complex_i(p1)), -p1) <= 1e-14);
                // Clifford multiplication is complex linear
                CHECK(max_abs_diff(clifford_action(s, x, complex_i(p1)), complex_i(clifford_action(s, x, p1))) <= 1e-12);
            } else {
                const double xx = x(0) * x(0) - x(1) * x(1);
                CHECK(max_abs_diff(clifford_action(s, x, clifford_action(s, x, p1)), -xx * p1) <= 1e-12);
            }
        }
    }
}

TEST_CASE("spinor: split into half spinors") {
    std::mt19937_64 rng(12);
    const SplitSpinor one = split_pm(Multivector::scalar(cl12::sig(), 1.0));
    CHECK(std::abs(one.indicator - (mv_tau(Multivector::scalar(cl12::sig(), 1.0)) * Multivector::scalar(cl12::sig(), 1.0)).scalar_part()) <=
          1e-15);
    for (int n = 0; n < 500; ++n) {
        const Multivector psi = random_even(cl12::sig(), rng);
        const SplitSpinor sp = split_pm(psi);
        CHECK(max_abs_diff(sp.plus + sp.minus, psi) <= 1e-14);
        const SplitSpinor again = split_pm(sp.plus);
        CHECK(max_abs_diff(again.plus, sp.plus) <= 1e-14);
        CHECK(again.minus.max_abs() <= 1e-14);
        CHECK(std::abs(sp.indicator - indicator(psi)) <= 1e-12);
        const Multivector n2 = mv_tau(psi) * psi;
        CHECK(std::abs(sp.indicator - n2.scalar_part()) <= 1e-12);
        CHECK((n2 - Multivector::scalar(cl12::sig(), n2.scalar_part())).max_abs() <= 1e-12);
    }
}

TEST_CASE("spinor: intrinsic Riemannian form matches the extrinsic one") {
    for (const auto& kind : group_kinds()) {
        CAPTURE(kind.name());
        CHECK(max_sweep(KillingForm::intrinsic_riemannian, KillingForm::extrinsic_group, kind, SurfaceSignature::riemannian, 21) <=
              1e-12);
    }
}

TEST_CASE("spinor: Gamma_2 needs the nu_k T_j - nu_j T_k orientation") {
    // With the opposite orientation the vector part of Gamma enters with the
    // wrong sign and the sweep fails on every non-flat kind.
    std::mt19937_64 rng(22);
    const SpaceKind kind = SpaceKind::algebra_a(0.7);
    const GeometryData d = random_group_node(kind, SurfaceSignature::riemannian, rng);
    const KillingEquation ext = make_equation(KillingForm::extrinsic_group, kind, d);
    const KillingEquation in = make_equation(KillingForm::intrinsic_riemannian, kind, d);
    const Multivector psi = random_even(cl12::sig(), rng);
    const Eigen::Vector2d x = random_tangent(rng);
    const Eigen::Vector2d v = gamma_vector(in.algebra, d, 0, x);
    REQUIRE(v.norm() > 1e-3);
    const Multivector flipped = killing_rhs(in, psi, 0, x) - complex_i(clifford_action(in.space, v, psi));
    CHECK(max_abs_diff(killing_rhs(in, psi, 0, x), killing_rhs(ext, psi, 0, x)) <= 1e-12);
    CHECK(max_abs_diff(flipped, killing_rhs(ext, psi, 0, x)) >= 1e-3);
}

TEST_CASE("spinor: intrinsic Lorentzian form matches the extrinsic one") {
    for (const auto& kind : group_kinds()) {
        CAPTURE(kind.name());
        CHECK(max_sweep(KillingForm::intrinsic_lorentzian, KillingForm::extrinsic_group, kind, SurfaceSignature::lorentzian, 23) <=
              1e-12);
    }
}

TEST_CASE("spinor: specialised forms agree with the general one") {
    const auto riem = SurfaceSignature::riemannian;
    CHECK(max_sweep(KillingForm::product_h2r, KillingForm::intrinsic_riemannian, SpaceKind::product_h2xr(1.3), riem, 31) <= 1e-12);
    CHECK(max_sweep(KillingForm::product_rs12, KillingForm::intrinsic_riemannian, SpaceKind::product_rxs12(0.9), riem, 32) <= 1e-12);
    CHECK(max_sweep(KillingForm::product_rh12, KillingForm::intrinsic_riemannian, SpaceKind::product_rxh12(1.1), riem, 33) <= 1e-12);
    CHECK(max_sweep(KillingForm::lkt, KillingForm::intrinsic_riemannian, SpaceKind::lkt(-1.0, 0.5), riem, 34) <= 1e-12);
    CHECK(max_sweep(KillingForm::lkt, KillingForm::intrinsic_riemannian, SpaceKind::lkt(2.0, -0.7), riem, 35) <= 1e-12);
    CHECK(max_sweep(KillingForm::su12, KillingForm::intrinsic_riemannian, SpaceKind::su12(), riem, 36) <= 1e-12);
    CHECK(max_sweep(KillingForm::lkt, KillingForm::su12, SpaceKind::su12(), riem, 37) <= 1e-15);
    CHECK(max_sweep(KillingForm::r12_riemannian, KillingForm::intrinsic_riemannian, SpaceKind::minkowski(), riem, 38) <= 1e-12);
}

namespace {

struct Prepared {
    ChartBundle bundle;
    GeometryData data;
};

Prepared prepare(const std::string& family, const SpaceKind& kind, int n, const FamilyParams& p = {}) {
    auto b = build_chart(family, kind, p, n, n);
    auto d = extract_geometry(b.immersion, b.chart);
    return {std::move(b), std::move(d)};
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// Pseudosphere metric with S = lambda id and lambda^2 + tau^2 = 1, which makes
// the killing_lkt system integrable.
KillingEquation lkt_pair(const Prepared& p, double tau) {
    const double lambda = std::sqrt(1 - tau * tau);
    GeometryData d = prescribed_shape(p.bundle.chart, SpaceKind::lkt(-1.0, tau),
                                      [&](std::size_t) { return Eigen::Matrix2d(lambda * Eigen::Matrix2d::Identity()); });
    return make_equation(KillingForm::killing_lkt, SpaceKind::lkt(-1.0, tau), std::move(d), tau);
}

double interior_max(const Grid& g, const std::function<double(std::size_t)>& f) {
    double m = 0;
    for (int j = 1; j + 1 < g.nv; ++j)
        for (int i = 1; i + 1 < g.nu; ++i) m = std::max(m, f(g.index(i, j)));
    return m;
}

}  // namespace

TEST_CASE("spinor: covariant derivative") {
    const Prepared flat = prepare("plane", SpaceKind::minkowski(), 12);
    SpinorField f{flat.bundle.chart, intrinsic_space(SurfaceSignature::riemannian),
                  std::vector<Multivector>(static_cast<std::size_t>(flat.bundle.chart.grid.size()), cl12::blade(3, 0.4) + cl12::blade(0, 1.0))};
    for (int a = 0; a < 2; ++a)
        for (const auto& v : spinor_covariant_derivative(f, a).values) CHECK(v.max_abs() <= 1e-11);

    // Leibniz rule against the spin product on the sphere cap
    std::vector<double> err;
    for (int n : {17, 33, 65}) {
        const auto b = build_chart("sphere_cap", SpaceKind::euclidean3(), {}, n, n);
        const Grid& g = b.chart.grid;
        SpinorField p{b.chart, intrinsic_space(SurfaceSignature::riemannian), {}}, q = p;
        std::vector<Multivector> prod;
        for (int j = 0; j < g.nv; ++j)
            for (int i = 0; i < g.nu; ++i) {
                const double u = g.u(i), v = g.v(j);
                p.values.push_back(std::cos(u) * cl12::blade(0) + std::sin(v) * u * cl12::blade(3) + u * v * cl12::blade(6));
                q.values.push_back(std::exp(-v) * cl12::blade(0) + std::sin(u + v) * cl12::blade(5) + 0.3 * cl12::blade(6));
                prod.push_back(spin_product(p.values.back(), q.values.back()));
            }
        double worst = 0;
        for (int a = 0; a < 2; ++a) {
            const SpinorField dp = spinor_covariant_derivative(p, a), dq = spinor_covariant_derivative(q, a);
            for (int j = 1; j + 1 < g.nv; ++j)
                for (int i = 1; i + 1 < g.nu; ++i) {
                    const auto k = g.index(i, j);
                    const Multivector lhs = frame_derivative(b.chart, prod, i, j, a);
                    const Multivector rhs = spin_product(dp.values[k], q.values[k]) + spin_product(p.values[k], dq.values[k]);
                    worst = std::max(worst, max_abs_diff(lhs, rhs));
                }
        }
        err.push_back(worst);
    }
    CAPTURE(err[1]);
    CAPTURE(err[2]);
    CHECK(order(err[1], err[2]) >= 1.9);
}

TEST_CASE("spinor: restricted ambient spinors satisfy the extrinsic equations") {
    struct Case {
        const char* family;
        SpaceKind kind;
        KillingForm form;
        FamilyParams params;
    };
    const std::vector<Case> cases{
        {"group_graph", SpaceKind::algebra_b(0.5), KillingForm::extrinsic_group, {}},
        {"group_graph", SpaceKind::product_rxs12(0.9), KillingForm::extrinsic_group, {}},
        {"vertical_cylinder", SpaceKind::su12(), KillingForm::extrinsic_group, {}},
        {"rs2_slice", SpaceKind::product_rminus_s2(), KillingForm::product_rminus_s2, {{"t0", -0.7}}},
        {"rs2_slice", SpaceKind::product_rminus_s2(), KillingForm::product_rminus_s2, {{"tilt", 0.3}}},
        {"h2_slice", SpaceKind::anti_de_sitter(), KillingForm::antidesitter, {}},
        {"s2_slice", SpaceKind::de_sitter(), KillingForm::desitter, {}},
    };
    for (const auto& c : cases) {
        std::vector<double> r, rms;
        for (int n : {17, 33, 65}) {
            const Prepared p = prepare(c.family, c.kind, n, c.params);
            const KillingEquation eq = make_equation(c.form, c.kind, p.data);
            const SpinorField lift = frame_lift(p.bundle.chart, p.data);
            for (const auto& v : lift.values) REQUIRE(unit_defect(eq, v) <= 1e-12);
            const ResidualField res = residual_killing(eq, lift);
            r.push_back(res.max_interior);
            rms.push_back(res.l2_interior);
        }
        CAPTURE(std::string(c.family));
        CAPTURE(c.kind.name());
        CAPTURE(r[1]);
        CAPTURE(r[2]);
        CHECK(order(r[1], r[2]) >= 1.9);
        CHECK(order(rms[1], rms[2]) >= 1.9);
    }
}

TEST_CASE("spinor: parallel spinor on flat data") {
    const Prepared p = prepare("plane", SpaceKind::minkowski(), 12);
    const KillingEquation eq = make_equation(KillingForm::r12_riemannian, SpaceKind::minkowski(), p.data);
    std::mt19937_64 rng(41);
    for (int n = 0; n < 20; ++n) {
        const Multivector x = random_even(cl12::sig(), rng);
        CHECK(killing_rhs(eq, x, 5, random_tangent(rng)).max_abs() <= 1e-9);
    }
    const KillingSolution sol = solve_killing(eq, p.bundle.chart, Multivector::scalar(cl12::sig(), 1.0));
    for (const auto& v : sol.field.values) CHECK(max_abs_diff(v, Multivector::scalar(cl12::sig(), 1.0)) <= 1e-9);
    CHECK(sol.integrability <= 1e-9);
    CHECK(residual_killing(eq, sol.field).max_interior <= 1e-9);
}

TEST_CASE("spinor: solver on pseudosphere data") {
    std::vector<double> plaq, drift, res;
    for (int n : {17, 33, 65}) {
        const Prepared p = prepare("pseudosphere", SpaceKind::minkowski(), n);
        const KillingEquation eq = make_equation(KillingForm::r12_riemannian, SpaceKind::minkowski(), p.data);
        const SpinorField lift = frame_lift(p.bundle.chart, p.data);
        const Grid& g = p.bundle.chart.grid;
        const KillingSolution sol = solve_killing(eq, p.bundle.chart, lift.values[g.index(g.nu / 2, g.nv / 2)]);
        plaq.push_back(sol.integrability);
        drift.push_back(sol.unit_drift);
        res.push_back(residual_killing(eq, sol.field).max_interior);
        // the solution is the restricted constant spinor
        CHECK(field_distance(lift, sol.field) <= 2e-2 * (17.0 / n) * (17.0 / n));
    }
    CAPTURE(plaq[1]);
    CAPTURE(plaq[2]);
    CAPTURE(drift[2]);
    CHECK(order(plaq[1], plaq[2]) >= 1.9);
    CHECK(order(res[1], res[2]) >= 1.9);
    CHECK(drift[2] <= 1e-6);
    CHECK(drift[1] / drift[2] >= 3.5);

    // corrupted shape operator
    const Prepared p = prepare("pseudosphere", SpaceKind::minkowski(), 33);
    GeometryData bad = p.data;
    const Grid& g = p.bundle.chart.grid;
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i) bad.shape[g.index(i, j)](0, 0) += 0.3 * std::sin(3 * g.u(i));
    complete_shape(bad, p.bundle.chart);
    const KillingEquation eq = make_equation(KillingForm::r12_riemannian, SpaceKind::minkowski(), bad);
    const KillingSolution sol = solve_killing(eq, p.bundle.chart, Multivector::scalar(cl12::sig(), 1.0));
    CHECK(sol.integrability >= 1e-2);
}

TEST_CASE("spinor: solver input validation") {
    const Prepared p = prepare("pseudosphere", SpaceKind::minkowski(), 12);
    const KillingEquation eq = make_equation(KillingForm::r12_riemannian, SpaceKind::minkowski(), p.data);
    CHECK_THROWS_AS(solve_killing(eq, p.bundle.chart, Multivector::scalar(cl12::sig(), 1.1)), std::invalid_argument);
    CHECK_THROWS_AS(solve_killing(eq, p.bundle.chart, cl12::e(1)), std::invalid_argument);
    CHECK_THROWS_AS(make_equation(KillingForm::desitter, SpaceKind::minkowski(), p.data), std::invalid_argument);
    CHECK_THROWS_AS(make_equation(KillingForm::intrinsic_lorentzian, SpaceKind::minkowski(), p.data), std::invalid_argument);
    GeometryData thin = p.data;
    thin.t.clear();
    const KillingEquation eq2 = make_equation(KillingForm::intrinsic_riemannian, SpaceKind::minkowski(), thin);
    CHECK_THROWS_AS(solve_killing(eq2, p.bundle.chart, Multivector::scalar(cl12::sig(), 1.0)), std::invalid_argument);
    CHECK(form_from_name(form_name(KillingForm::product_rh12)) == KillingForm::product_rh12);
    CHECK_THROWS_AS(form_from_name("gauss"), std::invalid_argument);
}

TEST_CASE("spinor: Dirac operator and shape recovery") {
    const double tau = 0.6, lambda = 0.8;
    std::vector<double> dres, sres, symm, trace, back;
    for (int n : {17, 33, 65}) {
        const Prepared p = prepare("pseudosphere", SpaceKind::minkowski(), n);
        const KillingEquation eq = lkt_pair(p, tau);
        const Grid& g = p.bundle.chart.grid;
        const KillingSolution sol = solve_killing(eq, p.bundle.chart, Multivector::scalar(cl12::sig(), 1.0));
        const SpinorField d = dirac(sol.field);
        const SpinorSpace& s = sol.field.space;
        dres.push_back(interior_max(g, [&](std::size_t k) {
            const Multivector& psi = sol.field.values[k];
            return std::sqrt((d.values[k] + lambda * complex_i(psi) - tau * complex_i(omega_action(s, psi))).norm2());
        }));
        const auto shapes = shape_from_spinor(sol.field, tau);
        sres.push_back(interior_max(g, [&](std::size_t k) { return (shapes[k] - lambda * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(); }));
        symm.push_back(interior_max(g, [&](std::size_t k) { return std::abs(shapes[k](0, 1) - shapes[k](1, 0)); }));
        trace.push_back(interior_max(g, [&](std::size_t k) { return std::abs(shapes[k].trace() - 2 * lambda); }));
        // converse: the recovered shape operator turns the field into a Killing solution
        GeometryData rec = prescribed_shape(p.bundle.chart, SpaceKind::lkt(-1.0, tau), [&](std::size_t k) { return shapes[k]; });
        const KillingEquation eq2 = make_equation(KillingForm::killing_lkt, SpaceKind::lkt(-1.0, tau), std::move(rec), tau);
        back.push_back(residual_killing(eq2, sol.field).max_interior);
    }
    for (const auto* v : {&dres, &sres, &symm, &trace, &back}) {
        CAPTURE((*v)[1]);
        CAPTURE((*v)[2]);
        CHECK(order((*v)[1], (*v)[2]) >= 1.9);
    }

    const Prepared flat = prepare("plane", SpaceKind::minkowski(), 10);
    SpinorField c{flat.bundle.chart, intrinsic_space(SurfaceSignature::riemannian),
                  std::vector<Multivector>(100, Multivector::scalar(cl12::sig(), 1.0))};
    for (const auto& v : dirac(c).values) CHECK(v.max_abs() <= 1e-11);
    SpinorField z = c;
    z.values[44] = Multivector(cl12::sig());
    CHECK_THROWS_AS(shape_from_spinor(z, 0.0), std::runtime_error);
}

TEST_CASE("spinor: harmonic spinor of the Enneper patch") {
    std::vector<double> r;
    for (int n : {17, 33, 65}) {
        const Prepared p = prepare("enneper", SpaceKind::euclidean3(), n);
        const KillingEquation eq = make_equation(KillingForm::r3_euclidean, SpaceKind::euclidean3(), p.data);
        const KillingSolution sol = solve_killing(eq, p.bundle.chart, Multivector::scalar(cl12::sig(), 1.0));
        const SpinorField d = dirac(sol.field);
        r.push_back(interior_max(p.bundle.chart.grid, [&](std::size_t k) { return std::sqrt(d.values[k].norm2()); }));
        CHECK(sol.unit_drift <= 1e-5);
    }
    CAPTURE(r[1]);
    CAPTURE(r[2]);
    CHECK(order(r[1], r[2]) >= 1.9);
}
