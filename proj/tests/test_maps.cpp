#include <catch2/catch_amalgamated.hpp>

#include "snapback/builtins.hpp"
#include "snapback/map.hpp"

using namespace snapback;

TEST_CASE("built-in map values") {
    auto logistic = make_builtin("logistic", {1.0});
    CHECK(logistic(Vec(0.5))[0] == Catch::Approx(1.0).margin(1e-15));

    auto doubling = make_builtin("doubling", {});
    CHECK(doubling(Vec(kTwoPi / 6.0))[0] == Catch::Approx(kTwoPi / 3.0).margin(1e-14));

    auto fold = make_builtin("fold_normal", {2});
    Vec y = fold(Vec(0.5, -0.3));
    CHECK(y[0] == Catch::Approx(0.5));
    CHECK(y[1] == Catch::Approx(0.09));
}

TEST_CASE("built-in map errors") {
    CHECK_THROWS_AS(make_builtin("unknown_map", {}), map_error);
    CHECK_THROWS_AS(make_builtin("logistic", {}), map_error);          // missing mu
    CHECK_THROWS_AS(make_builtin("doubling", {1.0}), map_error);       // extra param
    CHECK_THROWS_AS(make_builtin("fold_normal", {3}), map_error);      // bad dimension
}

TEST_CASE("jacobian values") {
    auto logistic = make_builtin("logistic", {1.0});
    CHECK(logistic.jacobian(Vec(0.0)).m[0] == Catch::Approx(4.0));

    auto fold = make_builtin("fold_normal", {2});
    CHECK(fold.jacobian(Vec(0.7, 0.0)).det() == Catch::Approx(0.0).margin(1e-15));

    // example2d: analytic vs central differences at interior probes
    auto ex = make_builtin("example2d", {0.0});
    REQUIRE(ex.has_analytic_jacobian());
    for (int i = 0; i < 32; ++i) {
        Vec q = quasi_uniform_2d(i);
        Vec x(1.6 * q[0] - 0.8, 1.6 * q[1] - 0.8);
        if (x.norm() > 0.95) continue;
        Mat a = ex.jacobian(x);
        Mat d = ex.fd_jacobian(x);
        double gap = 0;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) gap = std::max(gap, std::abs(a.at(r, c) - d.at(r, c)));
        CHECK(gap < 1e-6);
    }
}

TEST_CASE("analytic and finite-difference jacobians agree on 1000 probes") {
    struct Probe {
        MapDefinition map;
        Box box;
    };
    std::vector<Probe> probes;
    probes.push_back({make_builtin("logistic", {1.2}), {Vec(-0.9), Vec(1.1)}});
    probes.push_back({make_builtin("doubling", {}), {Vec(0.0), Vec(kTwoPi)}});
    probes.push_back({make_builtin("fold_normal", {2}), {Vec(-1.0, -1.0), Vec(1.0, 1.0)}});
    probes.push_back({make_builtin("example2d", {0.05}), {Vec(-0.65, -0.65), Vec(0.65, 0.65)}});

    for (auto& pr : probes) {
        double worst = 0;
        for (int i = 0; i < 1000; ++i) {
            Vec x;
            if (pr.map.dimension == 1) {
                x = Vec(pr.box.lo[0] + quasi_uniform_1d(i) * (pr.box.hi[0] - pr.box.lo[0]));
            } else {
                Vec q = quasi_uniform_2d(i);
                x = Vec(pr.box.lo[0] + q[0] * (pr.box.hi[0] - pr.box.lo[0]),
                        pr.box.lo[1] + q[1] * (pr.box.hi[1] - pr.box.lo[1]));
            }
            Mat a = pr.map.jacobian(x);
            Mat d = pr.map.fd_jacobian(x);
            for (int r = 0; r < pr.map.dimension; ++r)
                for (int c = 0; c < pr.map.dimension; ++c)
                    worst = std::max(worst, std::abs(a.at(r, c) - d.at(r, c)));
        }
        INFO(pr.map.name);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("circle maps are 2*pi periodic") {
    auto doubling = make_builtin("doubling", {});
    for (int i = 0; i < 64; ++i) {
        double t = kTwoPi * quasi_uniform_1d(i);
        double d = wrap_signed(doubling(Vec(t + kTwoPi))[0] - doubling(Vec(t))[0]);
        CHECK(std::abs(d) < 1e-12);
    }
}

TEST_CASE("bump deformation") {
    SECTION("zero amplitude is pointwise the base map") {
        auto base = make_builtin("logistic", {1.0});
        BumpDeformation spec;
        spec.center = Vec(0.5);
        spec.inner_radius = 0.1;
        spec.outer_radius = 0.2;
        spec.direction = Vec(1.0);
        spec.amplitude = 0.0;
        auto d = deform(base, spec);
        for (int i = 0; i < 100; ++i) {
            double x = -1.0 + 3.0 * quasi_uniform_1d(i);
            CHECK(std::abs(d(Vec(x))[0] - base(Vec(x))[0]) < 1e-15);
        }
    }
    SECTION("plateau shift at the center") {
        auto base = make_builtin("fold_normal", {2});
        BumpDeformation spec;
        spec.center = Vec(0.0, 0.0);
        spec.inner_radius = 0.05;
        spec.outer_radius = 0.2;
        spec.direction = Vec(0.0, 1.0);
        spec.amplitude = 0.1;
        auto d = deform(base, spec);
        Vec y = d(Vec(0.0, 0.0));
        CHECK(y[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(y[1] == Catch::Approx(0.1));
    }
    SECTION("additive shift on the logistic plateau") {
        auto base = make_builtin("logistic", {1.0});
        for (double s : {0.05, -0.02}) {
            BumpDeformation spec;
            spec.center = Vec(0.5);
            spec.inner_radius = 0.05;
            spec.outer_radius = 0.15;
            spec.direction = Vec(1.0);
            spec.amplitude = s;
            auto d = deform(base, spec);
            CHECK(d(Vec(0.5))[0] == Catch::Approx(1.0 + s));
        }
    }
    SECTION("deformed analytic jacobian still matches differences") {
        auto base = make_builtin("logistic", {1.0});
        BumpDeformation spec;
        spec.center = Vec(0.5);
        spec.inner_radius = 0.05;
        spec.outer_radius = 0.25;
        spec.direction = Vec(1.0);
        spec.amplitude = 0.03;
        auto d = deform(base, spec);
        for (int i = 0; i < 200; ++i) {
            double x = 0.2 + 0.6 * quasi_uniform_1d(i);
            CHECK(std::abs(d.jacobian(Vec(x)).m[0] - d.fd_jacobian(Vec(x)).m[0]) < 1e-6);
        }
    }
    SECTION("support overlapping a protected repellor ball is rejected") {
        auto base = make_builtin("logistic", {1.0});
        BumpDeformation spec;
        spec.center = Vec(0.1);
        spec.inner_radius = 0.05;
        spec.outer_radius = 0.2;
        spec.direction = Vec(1.0);
        spec.amplitude = 0.01;
        spec.has_protected_ball = true;
        spec.protected_center = Vec(0.0);
        spec.protected_radius = 0.05;
        CHECK_THROWS_AS(deform(base, spec), map_error);
    }
    SECTION("radius ordering enforced") {
        auto base = make_builtin("logistic", {1.0});
        BumpDeformation spec;
        spec.center = Vec(0.5);
        spec.inner_radius = 0.2;
        spec.outer_radius = 0.1;
        spec.direction = Vec(1.0);
        CHECK_THROWS_AS(deform(base, spec), map_error);
    }
}

TEST_CASE("parametric family sanity") {
    auto fam = make_logistic_family();
    for (double mu : {0.2, 0.8, 1.0, 1.4}) {
        auto m = fam.at(mu);
        CHECK(std::abs(m(fam.repellor_point)[0] - fam.repellor_point[0]) < 1e-15);
    }
}
