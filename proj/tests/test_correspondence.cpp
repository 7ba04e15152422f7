#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>
#include "spinsurf/correspondence.hpp"
#include "spinsurf/immersion_reconstruct.hpp"

using namespace spinsurf;

namespace {

double order(double coarse, double fine) { return std::log2(coarse / fine); }

SpinorField solve_with_shape(const ChartBundle& b, KillingForm form, const SpaceKind& kind, const Eigen::Matrix2d& s, double tau = 0) {
    GeometryData d = prescribed_shape(b.chart, kind, [&](std::size_t) { return s; });
    const KillingEquation eq = make_equation(form, kind, std::move(d), tau);
    return solve_killing(eq, b.chart, Multivector::scalar(cl12::sig(), 1.0)).field;
}

// Enneper patch over [-0.3, 0.3]^2: the Gauss map stays in the lower
// hemisphere and the indicator in [0.69, 1].
SpinorField enneper_spinor(int n) {
    const FamilyParams box{{"u0", -0.3}, {"u1", 0.3}, {"v0", -0.3}, {"v1", 0.3}};
    const auto b = build_chart("enneper", SpaceKind::euclidean3(), box, n, n);
    const GeometryData d = extract_geometry(b.immersion, b.chart);
    const KillingEquation eq = make_equation(KillingForm::r3_euclidean, SpaceKind::euclidean3(), d);
    return solve_killing(eq, b.chart, Multivector::scalar(cl12::sig(), 1.0)).field;
}

double interior_mean_curvature(const WeierstrassSurface& s) {
    const GeometryData d = extract_geometry(s.immersion, s.chart);
    const Grid& g = s.chart.grid;
    double m = 0;
    for (int j = 1; j + 1 < g.nv; ++j)
        for (int i = 1; i + 1 < g.nu; ++i) m = std::max(m, std::abs(d.mean[g.index(i, j)]));
    return m;
}

Eigen::Vector3d position(const ImmersionField& f, std::size_t k) { return GroupModel(f.kind).position(f.group[k]); }

}  // namespace

TEST_CASE("correspondence: Lawson rotation of a CMC sqrt 2 patch") {
    const double h1 = std::sqrt(2.0);
    FamilyParams params;
    params["radius"] = 1 / h1;
    for (int n : {17, 33, 65}) {
        const auto b = build_chart("pseudosphere", SpaceKind::minkowski(), params, n, n);
        const CmcPair in{solve_with_shape(b, KillingForm::r12_riemannian, SpaceKind::minkowski(), h1 * Eigen::Matrix2d::Identity()), h1,
                         CmcTarget::r12};
        const double r = cmc_dirac_residual(in).max_interior;
        CAPTURE(n);
        CAPTURE(r);
        CHECK(r > 0);
        for (int branch : {1, -1}) {
            const LawsonResult out = lawson_rotate(in, branch);
            CHECK(out.pair.target == CmcTarget::h13);
            CHECK(out.pair.mean == doctest::Approx(branch * 1.0).epsilon(1e-14));
            CHECK(std::sin(2 * out.theta) == doctest::Approx(1 / h1).epsilon(1e-14));
            CHECK(h1 * std::cos(2 * out.theta) == doctest::Approx(out.pair.mean).epsilon(1e-14));
            CHECK(is_spin(out.rotor, 1e-14));
            const double r2 = cmc_dirac_residual(out.pair).max_interior;
            CAPTURE(r2);
            CHECK(r2 <= 3 * r);
            double drift = 0;
            for (std::size_t k = 0; k < in.field.size(); ++k)
                drift = std::max(drift, std::abs(indicator(out.pair.field.values[k]) - indicator(in.field.values[k])));
            CHECK(drift <= 1e-12);
            // the proof's identity with H_1 cos 2 theta and H_1 sin 2 theta written out
            const CmcPair generic{out.pair.field, h1 * std::cos(2 * out.theta), CmcTarget::h13};
            CHECK(cmc_dirac_residual(generic).max_interior <= 3 * r);

            const LawsonResult back = lawson_inverse(out.pair, 1);
            CHECK(back.pair.mean == doctest::Approx(h1).epsilon(1e-14));
            CHECK(field_distance(in.field, back.pair.field) <= 1e-12);
        }
    }
}

TEST_CASE("correspondence: Lawson parameters and range") {
    const auto b = build_chart("plane", SpaceKind::minkowski(), {}, 9, 9);
    const SpinorField one{b.chart, intrinsic_space(SurfaceSignature::riemannian),
                          std::vector<Multivector>(81, Multivector::scalar(cl12::sig(), 1.0))};
    const LawsonResult unit = lawson_rotate({one, 1.0, CmcTarget::r12});
    CHECK(unit.theta == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
    CHECK(unit.pair.mean == 0.0);
    const LawsonResult neg = lawson_rotate({one, -2.0, CmcTarget::r12}, 1);
    CHECK(neg.pair.mean == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(-2.0 * std::cos(2 * neg.theta) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(std::sin(2 * neg.theta) == doctest::Approx(-0.5).epsilon(1e-14));
    const LawsonResult inv = lawson_inverse(neg.pair, -1);
    CHECK(inv.pair.mean == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(field_distance(one, inv.pair.field) <= 1e-14);

    try {
        lawson_rotate({one, 0.5, CmcTarget::r12});
        FAIL("expected a range error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("H_1 in (-inf,-1] u [1,inf)") != std::string::npos);
    }
    CHECK_THROWS_AS(lawson_rotate({one, 2.0, CmcTarget::h13}), std::invalid_argument);
    CHECK_THROWS_AS(lawson_rotate({one, 2.0, CmcTarget::r12}, 0), std::invalid_argument);
    CHECK_THROWS_AS(lawson_inverse({one, 2.0, CmcTarget::r12}), std::invalid_argument);
}

TEST_CASE("correspondence: Calabi map of the Enneper patch") {
    std::vector<double> res, trace;
    for (int n : {17, 33, 65}) {
        const SpinorField psi1 = enneper_spinor(n);
        const CalabiResult c = calabi_map(psi1.chart, psi1);
        CHECK(c.min_indicator > 0);
        CHECK(indicator_defect(c.field) <= 1e-10);
        double frame = 0;
        for (std::size_t k = 0; k < psi1.size(); ++k)
            frame = std::max(frame, (c.chart.frame[k] * indicator(psi1.values[k]) - psi1.chart.frame[k]).cwiseAbs().maxCoeff());
        CHECK(frame <= 1e-12);
        res.push_back(cmc_dirac_residual({c.field, 0.0, CmcTarget::r12}).max_interior);
        // the image is maximal: the recovered shape operator is trace free
        const RoundTripReport rt = dirac_killing_roundtrip(c.field, std::vector<double>(c.field.size(), 0.0), 0.0);
        trace.push_back(rt.trace_defect);
    }
    CAPTURE(res[0]);
    CAPTURE(res[1]);
    CAPTURE(res[2]);
    CHECK(order(res[1], res[2]) >= 1.9);
    CAPTURE(trace[1]);
    CAPTURE(trace[2]);
    CHECK(order(trace[1], trace[2]) >= 1.9);
}

TEST_CASE("correspondence: Calabi preconditions") {
    const auto b = build_chart("plane", SpaceKind::minkowski(), {}, 9, 9);
    SpinorField one{b.chart, intrinsic_space(SurfaceSignature::riemannian),
                    std::vector<Multivector>(81, Multivector::scalar(cl12::sig(), 1.0))};
    const CalabiResult same = calabi_map(b.chart, one);
    CHECK(field_distance(one, same.field) <= 1e-15);
    for (std::size_t k = 0; k < 81; ++k) CHECK((same.chart.metric[k] - b.chart.metric[k]).cwiseAbs().maxCoeff() <= 1e-15);

    SpinorField bad = one;
    bad.values[b.chart.grid.index(3, 4)] = cl12::blade(3);  // unit length, indicator -1
    try {
        calabi_map(b.chart, bad);
        FAIL("expected a hemisphere violation");
    } catch (const HemisphereViolation& e) {
        CHECK(e.node == b.chart.grid.index(3, 4));
        CHECK(std::string(e.what()).find("(3,4)") != std::string::npos);
    }
    SpinorField longer = one;
    for (auto& v : longer.values) v = 1.1 * v;
    CHECK_THROWS_AS(calabi_map(b.chart, longer), std::invalid_argument);
    SpinorField twisted = one;
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 9; ++i) {
            const double t = 0.8 * b.chart.grid.u(i);
            twisted.values[b.chart.grid.index(i, j)] = Multivector::scalar(cl12::sig(), std::cos(t)) + std::sin(t) * cl12::blade(3);
        }
    CHECK_THROWS_AS(calabi_map(b.chart, twisted), std::invalid_argument);
}

TEST_CASE("correspondence: Weierstrass data and surfaces") {
    const Grid plane_grid = Grid::over(9, 7, -1, 1, -0.5, 0.5);
    const WeierstrassSurface plane = weierstrass_surface(weierstrass_sample("plane", plane_grid), Eigen::Vector3d(0.5, 0, 0));
    CHECK(plane.path_defect == 0.0);
    for (int j = 0; j < plane_grid.nv; ++j)
        for (int i = 0; i < plane_grid.nu; ++i) {
            const Eigen::Vector3d p = position(plane.immersion, plane_grid.index(i, j));
            CHECK((p - Eigen::Vector3d(0.5 + plane_grid.u(i) + 1, plane_grid.v(j) + 0.5, 0)).norm() <= 1e-14);
        }

    std::vector<double> lorentz_h, enneper_h, euclid_err, hs;
    for (int n : {17, 33, 65}) {
        const Grid g = Grid::over(n, n, 0.5, 1.0, 0, 1.2);
        const WeierstrassData cat = weierstrass_sample("catenoid", g);
        CHECK(cat.conformality_defect() <= 1e-12);
        CHECK(cat.holomorphy_defect() <= 1e-2);
        const WeierstrassData lor = weierstrass_transform(cat);
        CHECK(lor.flavor == WeierstrassFlavor::lorentz_maximal);
        CHECK(lor.conformality_defect() <= 1e-12);

        const Eigen::Vector3d anchor(std::cosh(0.5), 0, 0.5);
        const WeierstrassSurface e = weierstrass_surface(cat, anchor);
        double err = 0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double u = g.u(i), v = g.v(j);
                err = std::max(err, (position(e.immersion, g.index(i, j)) - Eigen::Vector3d(std::cosh(u) * std::cos(v), std::cosh(u) * std::sin(v), u)).norm());
            }
        euclid_err.push_back(err);
        const WeierstrassSurface l = weierstrass_surface(lor);
        CHECK(l.immersion.kind.tag == SpaceTag::minkowski_r12);
        lorentz_h.push_back(interior_mean_curvature(l));
        hs.push_back(g.hu);

        const WeierstrassSurface en = weierstrass_surface(weierstrass_sample("enneper", Grid::over(n, n, -0.5, 0.5, -0.5, 0.5)));
        enneper_h.push_back(interior_mean_curvature(en));
    }
    // polynomial data: the differences of the cubic surface are exact
    CHECK(enneper_h[2] <= 1e-10);
    for (const auto* v : {&euclid_err, &lorentz_h}) {
        CAPTURE((*v)[1]);
        CAPTURE((*v)[2]);
        CHECK(order((*v)[1], (*v)[2]) >= 1.9);
    }
    CHECK(lorentz_h[2] / (hs[2] * hs[2]) <= 1.5 * lorentz_h[1] / (hs[1] * hs[1]));

    WeierstrassData broken = weierstrass_sample("catenoid", Grid::over(9, 9, 0.5, 1.0, 0, 1.2));
    broken.phi[40][2] += 1e-6;
    CHECK_THROWS_AS(weierstrass_transform(broken), std::invalid_argument);
    CHECK_THROWS_AS(weierstrass_surface(broken), std::invalid_argument);
    CHECK_THROWS_AS(weierstrass_sample("helicoid", plane_grid), std::invalid_argument);
    // a conformal but non-holomorphic triple: the path integral depends on the path
    WeierstrassData wavy = weierstrass_sample("plane", Grid::over(17, 17, 0, 1, 0, 1));
    for (std::size_t k = 0; k < wavy.phi.size(); ++k) {
        const double t = 3 * wavy.grid.v(static_cast<int>(k) / 17);
        wavy.phi[k] = {std::complex<double>(std::cos(t), 0), std::complex<double>(0, -std::cos(t)), 0.0};
    }
    CHECK(wavy.conformality_defect() <= 1e-15);
    CHECK(wavy.holomorphy_defect() >= 1);
    CHECK_THROWS_AS(weierstrass_surface(wavy), std::runtime_error);
}

TEST_CASE("correspondence: transform twice is a half turn") {
    const Grid g = Grid::over(33, 33, 0.5, 1.0, 0, 1.2);
    const WeierstrassData cat = weierstrass_sample("catenoid", g);
    const WeierstrassData twice = weierstrass_transform(weierstrass_transform(cat));
    CHECK(twice.flavor == WeierstrassFlavor::euclidean_minimal);
    for (std::size_t k = 0; k < cat.phi.size(); ++k) {
        CHECK(std::abs(twice.phi[k][0] + cat.phi[k][0]) <= 1e-15);
        CHECK(std::abs(twice.phi[k][1] + cat.phi[k][1]) <= 1e-15);
        CHECK(std::abs(twice.phi[k][2] - cat.phi[k][2]) <= 1e-15);
    }
    const WeierstrassSurface a = weierstrass_surface(cat);
    const WeierstrassSurface b = weierstrass_surface(twice);
    const GroupModel model(SpaceKind::euclidean3());
    ImmersionField turned = b.immersion;
    for (auto& p : turned.group) {
        const Eigen::Vector3d x = model.position(p);
        p = model.mul_exp(model.identity(), Eigen::Vector3d(-x(0), -x(1), x(2)), 1.0);
    }
    CHECK(immersion_distance(turned, a.immersion) <= 1e-10);
    const Chart induced = make_chart(g, SurfaceSignature::riemannian, induced_metric(a.immersion));
    const ImmersionReport rep = verify_immersion(turned, induced, extract_geometry(a.immersion, induced));
    CAPTURE(rep.get("isometry").max_interior);
    CAPTURE(rep.get("normal").max_interior);
    CAPTURE(rep.get("second_form").max_interior);
    CHECK(rep.max_defect() <= 1e-10);
}

TEST_CASE("correspondence: Weierstrass CSV") {
    const WeierstrassData d = weierstrass_transform(weierstrass_sample("enneper", Grid::over(4, 3, -0.5, 0.5, -0.25, 0.25)));
    std::ostringstream a;
    write_weierstrass_csv(a, d);
    std::istringstream in(a.str());
    const WeierstrassData r = read_weierstrass_csv(in);
    CHECK(r.flavor == WeierstrassFlavor::lorentz_maximal);
    CHECK(r.grid.nu == 4);
    CHECK(r.grid.nv == 3);
    for (std::size_t k = 0; k < d.phi.size(); ++k)
        for (std::size_t m = 0; m < 3; ++m) CHECK(r.phi[k][m] == d.phi[k][m]);
    std::ostringstream b;
    write_weierstrass_csv(b, r);
    CHECK(a.str() == b.str());

    for (const std::string bad : {"", "flavor,nu,nv,u0,v0,hu,hv\nspherical,4,3,0,0,1,1\n",
                                  "flavor,nu,nv,u0,v0,hu,hv\neuclidean_minimal,4,3,0,0,1,1\ni,j,re1,im1,re2,im2,re3,im3\n0,0,1,0,0,-1,0,0\n",
                                  "flavor,nu,nv,u0,v0,hu,hv\neuclidean_minimal,3,3,0,0,1,1\ni,j,re1,im1,re2,im2,re3,im3\n0,0,1,0,x,-1,0,0\n"}) {
        std::istringstream s(bad);
        CHECK_THROWS_AS(read_weierstrass_csv(s), std::invalid_argument);
    }
}

TEST_CASE("correspondence: Dirac and Killing round trip") {
    const auto flat = build_chart("plane", SpaceKind::minkowski(), {}, 9, 9);
    const SpinorField one{flat.chart, intrinsic_space(SurfaceSignature::riemannian),
                          std::vector<Multivector>(81, Multivector::scalar(cl12::sig(), 1.0))};
    const RoundTripReport zero = dirac_killing_roundtrip(one, std::vector<double>(81, 0.0), 0.0,
                                                         std::vector<Eigen::Matrix2d>(81, Eigen::Matrix2d::Zero()));
    CHECK(zero.dirac_residual <= 1e-11);
    CHECK(zero.killing_residual <= 1e-11);
    CHECK(zero.recovered_killing <= 1e-11);

    // pseudosphere, tau = 0, H = 1: S = id comes back
    const auto ps = build_chart("pseudosphere", SpaceKind::minkowski(), {}, 33, 33);
    const SpinorField p = solve_with_shape(ps, KillingForm::r12_riemannian, SpaceKind::minkowski(), Eigen::Matrix2d::Identity());
    const auto n = p.size();
    const RoundTripReport r0 = dirac_killing_roundtrip(p, std::vector<double>(n, 1.0), 0.0,
                                                       std::vector<Eigen::Matrix2d>(n, Eigen::Matrix2d::Identity()));
    CHECK(r0.shape_defect <= 1e-3);
    CHECK(r0.ratio <= 3);

    // L(-4, 1) datum: radius 0.8 pseudosphere metric, S = 0.75 id, since the
    // Gauss equation reads -1/r^2 = -lambda^2 - tau^2
    FamilyParams params;
    params["radius"] = 0.8;
    std::vector<double> symm, trace, dres, kres, back;
    for (int m : {17, 33, 65}) {
        const auto b = build_chart("pseudosphere", SpaceKind::minkowski(), params, m, m);
        const Eigen::Matrix2d s = 0.75 * Eigen::Matrix2d::Identity();
        const SpinorField f = solve_with_shape(b, KillingForm::killing_lkt, SpaceKind::su12(), s, 1.0);
        const RoundTripReport r = dirac_killing_roundtrip(f, std::vector<double>(f.size(), 0.75), 1.0, std::vector<Eigen::Matrix2d>(f.size(), s));
        CAPTURE(m);
        CAPTURE(r.dirac_residual);
        CAPTURE(r.killing_residual);
        CHECK(r.ratio <= 3);
        symm.push_back(r.symmetry_defect);
        trace.push_back(r.trace_defect);
        dres.push_back(r.dirac_residual);
        kres.push_back(r.killing_residual);
        back.push_back(r.recovered_killing);
    }
    for (const auto* v : {&trace, &dres, &kres, &back}) {
        CAPTURE((*v)[1]);
        CAPTURE((*v)[2]);
        CHECK(order((*v)[1], (*v)[2]) >= 1.9);
    }
    // umbilic datum: the symmetric part is exact up to rounding
    CAPTURE(symm[2]);
    CHECK((symm[2] <= 1e-10 || order(symm[1], symm[2]) >= 1.9));

    SpinorField off = one;
    off.values[3] = 1.01 * off.values[3];
    CHECK_THROWS_AS(dirac_killing_roundtrip(off, std::vector<double>(81, 0.0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(dirac_killing_roundtrip(one, std::vector<double>(80, 0.0), 0.0), std::invalid_argument);
}
