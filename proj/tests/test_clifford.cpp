#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spinsurf/clifford.hpp"
#include "test_util.hpp"

using namespace spinsurf;

TEST_CASE("clifford: basis products") {
    const Signature s(1, 2);
    const auto e0 = cl12::e(0), e1 = cl12::e(1), e2 = cl12::e(2);
    CHECK((e0 * e0).scalar_part() == 1.0);
    CHECK((e1 * e1).scalar_part() == -1.0);
    CHECK((e1 * e2 + e2 * e1).max_abs() == 0.0);
    const auto vol = e0 * e1 * e2;
    CHECK(max_abs_diff(vol * vol, Multivector::scalar(s, -1.0)) == 0.0);
    CHECK_THROWS_AS(e0 * Multivector::basis(Signature(0, 3), 0), std::invalid_argument);
}

TEST_CASE("clifford: signature validation") {
    CHECK_THROWS_AS(Signature(3, 2), std::invalid_argument);
    CHECK_THROWS_AS(Signature(-1, 2), std::invalid_argument);
    const auto s = Signature::from_metric({1, 1, -1});
    CHECK(s.p() == 1);
    CHECK_FALSE(s.is_canonical());
    CHECK((Multivector::basis(s, 2) * Multivector::basis(s, 2)).scalar_part() == 1.0);
}

TEST_CASE("clifford: reversal") {
    const Signature s(1, 2);
    CHECK(max_abs_diff(mv_tau(Multivector::scalar(s, 1)), Multivector::scalar(s, 1)) == 0.0);
    CHECK(max_abs_diff(mv_tau(cl12::blade(6)), cl12::blade(6, -1)) == 0.0);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 200; ++k) {
        const auto a = testutil::random_mv(s, rng), b = testutil::random_mv(s, rng);
        CHECK(max_abs_diff(mv_tau(a * b), mv_tau(b) * mv_tau(a)) <= 1e-12);
        CHECK(max_abs_diff(mv_tau(mv_tau(a)), a) == 0.0);
    }
}

TEST_CASE("clifford: pairing") {
    const Signature s(1, 2);
    std::mt19937_64 rng(12);
    const auto one = Multivector::scalar(s, 1);
    CHECK(max_abs_diff(spin_product(cl12::e(1) * one, one), cl12::e(1)) == 0.0);
    for (int k = 0; k < 100; ++k) {
        const auto g = testutil::random_spin(s, rng);
        CHECK(max_abs_diff(spin_product(g, g), one) <= 1e-12);
        const auto v = testutil::random_mv(s, rng), w = testutil::random_mv(s, rng);
        CHECK(max_abs_diff(spin_product(g * v, g * w), spin_product(v, w)) <= 1e-12);
        CHECK(max_abs_diff(spin_product(v, w), mv_tau(spin_product(w, v))) <= 1e-12);
        const auto X = testutil::random_vector(s, rng);
        CHECK(max_abs_diff(spin_product(X * v, w), spin_product(v, X * w)) <= 1e-12);
    }
}

TEST_CASE("clifford: adjoint action") {
    const Signature s(0, 2);
    const double th = 0.3;
    const auto g = Multivector::scalar(s, std::cos(th)) + std::sin(th) * Multivector::blade(s, 3);
    const auto v = ad_action(g, Multivector::basis(s, 0));
    const auto rotated = std::cos(2 * th) * Multivector::basis(s, 0) + std::sin(2 * th) * Multivector::basis(s, 1);
    CHECK(max_abs_diff(v, rotated) <= 1e-15);
    CHECK(max_abs_diff(ad_action(Multivector::scalar(s, 1), Multivector::basis(s, 1)), Multivector::basis(s, 1)) == 0.0);
    CHECK_THROWS_AS(versor_inverse(Multivector::scalar(s, 1) + Multivector::blade(s, 1) + Multivector::blade(s, 3)), std::invalid_argument);
    std::mt19937_64 rng(13);
    const Signature m(1, 2);
    for (int k = 0; k < 500; ++k) {
        const auto g = testutil::random_spin(m, rng);
        const auto x = testutil::random_vector(m, rng);
        const auto y = ad_action(g, x);
        CHECK((y - y.grade(1)).max_abs() <= 1e-10);
        CHECK(std::abs((y * y).scalar_part() - (x * x).scalar_part()) <= 1e-10);
    }
}

TEST_CASE("clifford: spin predicate") {
    const Signature s(1, 2);
    CHECK(is_spin(Multivector::scalar(s, 1), 1e-12));
    for (double th : {0.0, 0.4, 1.7, -2.9}) {
        const auto a = Multivector::scalar(s, std::cos(th)) + std::sin(th) * cl12::blade(6);
        CHECK(is_spin(a, 1e-12));
    }
    CHECK_FALSE(is_spin(cl12::e(1), 1e-12));
    // e0e1 has tau(a)a = -1
    CHECK_FALSE(is_spin(cl12::blade(3), 1e-12));
}

TEST_CASE("clifford: skew operator dictionary") {
    const auto s = Signature::from_metric({1, 1, -1});
    Eigen::MatrixXd rot = Eigen::MatrixXd::Zero(3, 3);
    rot(1, 0) = 1;
    rot(0, 1) = -1;
    const auto b = skew_to_bivector(make_skew_operator(s, rot));
    CHECK(max_abs_diff(b, Multivector::blade(s, 3)) <= 1e-15);
    CHECK(max_abs_diff(commutator(b, Multivector::basis(s, 0)), Multivector::basis(s, 1)) <= 1e-15);

    Eigen::MatrixXd boost = Eigen::MatrixXd::Zero(3, 3);
    boost(2, 0) = 1;
    boost(0, 2) = 1;
    const auto bb = skew_to_bivector(make_skew_operator(s, boost));
    for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd col = boost.col(j);
        const auto expect = Multivector::vector(s, std::span<const double>(col.data(), 3));
        CHECK(max_abs_diff(commutator(bb, Multivector::basis(s, j)), expect) <= 1e-15);
    }
    CHECK(skew_to_bivector(SkewOperator{s, Eigen::MatrixXd::Zero(3, 3)}).max_abs() == 0.0);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(skew_to_bivector(SkewOperator{s, bad}), std::invalid_argument);
    CHECK_THROWS_AS(make_skew_operator(s, bad), std::invalid_argument);
}

TEST_CASE("clifford: spin lift") {
    std::mt19937_64 rng(21);
    for (const Signature s : {Signature(1, 2), Signature(1, 3), Signature(2, 2), Signature(0, 3)}) {
        for (int k = 0; k < 20; ++k) {
            const auto g = testutil::random_spin(s, rng, 0.8);
            const Eigen::MatrixXd A = ad_matrix(g);
            const auto lifted = spin_lift(s, A, &g);
            CHECK(max_abs_diff(lifted, g) <= 1e-9);
        }
    }
    Eigen::MatrixXd refl = Eigen::MatrixXd::Identity(3, 3);
    refl(1, 1) = -1;
    CHECK_THROWS(spin_lift(Signature(0, 3), refl));
}

TEST_CASE("clifford: text round trip") {
    const auto m = cl12::blade(0, 0.5) + cl12::blade(1, -2.25) + cl12::blade(6, 1e-17) + cl12::blade(7, 0.1);
    const std::string t = to_text(m);
    CHECK(t == "sig(1,2){ \"\": 0.5, \"1\": -2.25, \"23\": 1e-17, \"123\": 0.1 }");
    CHECK(max_abs_diff(parse_multivector(t), m) == 0.0);
    CHECK(to_text(Multivector(Signature(0, 2))) == "sig(0,2){ }");
    CHECK(parse_multivector("sig(0,2){ }").max_abs() == 0.0);
    const auto s = Signature::from_metric({1, 1, -1});
    const auto x = Multivector::blade(s, 5, 3.0);
    CHECK(to_text(x) == "sig[++-]{ \"13\": 3 }");
    CHECK(parse_multivector(to_text(x)).signature() == s);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
        const auto r = testutil::random_mv(Signature(2, 2), rng);
        CHECK(max_abs_diff(parse_multivector(to_text(r)), r) == 0.0);
    }
    CHECK_THROWS_AS(parse_multivector("sig(1,2){ \"21\": 1 }"), std::invalid_argument);
    CHECK_THROWS_AS(parse_multivector("sig(1,2){ \"1\": }"), std::invalid_argument);
}

TEST_CASE("clifford: complexified quaternion model") {
    using C = std::complex<double>;
    const auto one = hc_iso(Multivector::scalar(cl12::sig(), 1));
    CHECK(one.z[0] == C(1));
    const auto q0 = hc_iso(cl12::e(0));
    CHECK(q0.z[1] == C(0, 1));
    const auto vol = hc_iso(cl12::central_i());
    CHECK(std::abs(vol.z[0] - C(0, 1)) == 0.0);
    CHECK(std::abs(hc_iso(cl12::quat_i()).z[1] - C(1)) == 0.0);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 300; ++k) {
        const auto a = testutil::random_mv(cl12::sig(), rng), b = testutil::random_mv(cl12::sig(), rng);
        CHECK((hc_iso(a * b) - hc_iso(a) * hc_iso(b)).max_abs() <= 1e-12);
        CHECK(max_abs_diff(hc_iso_inverse(hc_iso(a)), a) <= 1e-12);
    }
    CHECK_THROWS_AS(hc_iso(Multivector(Signature(0, 3))), std::invalid_argument);
}

TEST_CASE("clifford: star map") {
    const Signature q(0, 2);
    const auto one = Multivector::scalar(q, 1);
    CHECK(max_abs_diff(star_map(one, StarCase::riemannian), Multivector::scalar(cl12::sig(), 1)) == 0.0);
    // quaternion J is f1; its image is iJ
    const auto j_img = hc_iso(star_map(Multivector::basis(q, 0), StarCase::riemannian));
    CHECK(std::abs(j_img.z[2] - std::complex<double>(0, 1)) == 0.0);

    std::mt19937_64 rng(8);
    const auto qi = cl12::quat_i();
    for (int k = 0; k < 100; ++k) {
        const auto psi = testutil::random_mv(q, rng);
        const auto fs = star_map(psi, StarCase::riemannian);
        CHECK(max_abs_diff(star_map_inverse(fs, StarCase::riemannian), psi) == 0.0);
        for (int i = 0; i < 2; ++i) {
            const auto lhs = star_map(Multivector::basis(q, i) * psi, StarCase::riemannian);
            const auto rhs = cl12::e(0) * cl12::e(i + 1) * fs * qi;
            CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
        }
        const Signature l(1, 1);
        const auto phi = testutil::random_mv(l, rng);
        const auto ls = star_map(phi, StarCase::lorentzian);
        CHECK(max_abs_diff(star_map_inverse(ls, StarCase::lorentzian), phi) == 0.0);
        for (int i = 0; i < 2; ++i) {
            const auto lhs = star_map(Multivector::basis(l, i) * phi, StarCase::lorentzian);
            const auto rhs = cl12::e(i) * cl12::e(2) * ls;
            CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(star_map(Multivector(Signature(1, 2)), StarCase::riemannian), std::invalid_argument);
}

TEST_CASE("clifford: injected product fault is visible") {
    const auto s = Signature::from_metric({1, 1, -1});
    const auto before = Multivector::basis(s, 0) * Multivector::basis(s, 1);
    {
        ProductSignFault f(1, 2);
        const auto during = Multivector::basis(s, 0) * Multivector::basis(s, 1);
        CHECK(max_abs_diff(before, -during) == 0.0);
    }
    CHECK(max_abs_diff(before, Multivector::basis(s, 0) * Multivector::basis(s, 1)) == 0.0);
}
