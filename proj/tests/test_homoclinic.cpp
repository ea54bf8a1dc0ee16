#include <catch2/catch_amalgamated.hpp>

#include "snapback/homoclinic.hpp"
#include "snapback/map.hpp"
#include "snapback/repellor.hpp"

using namespace snapback;

namespace {

// closed-form oracle: points near 1/2 with f_mu^2(x) = 0 solve 4 mu x(1-x) = 1
std::vector<double> logistic_depth2_roots(double mu) {
    double disc = 1.0 - 1.0 / mu;
    if (disc < 0) return {};
    double s = std::sqrt(disc);
    if (s == 0.0) return {0.5};
    return {0.5 * (1.0 - s), 0.5 * (1.0 + s)};
}

PeriodicOrbit logistic_repellor(const MapDefinition& f) { return find_periodic(f, Vec(0.01), 1); }

}  // namespace

TEST_CASE("doubling: depth-1 search finds the orbit through pi") {
    auto f = make_doubling();
    auto rep = find_periodic(f, Vec(0.1), 1);
    auto found = search_homoclinic(f, rep, 1, Box{Vec(0.0), Vec(kTwoPi)});
    REQUIRE(found.orbits.size() == 1);
    const auto& orb = found.orbits[0];
    CHECK(phase_dist(f.space, orb.point(), Vec(0.5 * kTwoPi)) < 1e-10);
    CHECK(orb.classification == OrbitClass::Regular);
    CHECK(orb.segment.size() == 2);
    CHECK(phase_dist(f.space, orb.segment.front(), rep.points[0]) < 1e-12);
    // tail halves angles toward 0
    REQUIRE(orb.tail.chain.size() >= 2);
    CHECK(phase_dist(f.space, orb.tail.chain[1], Vec(0.25 * kTwoPi)) < 1e-10);
}

TEST_CASE("logistic depth-2 orbit counts match the quadratic oracle") {
    struct Case {
        double mu;
        size_t count;
    };
    for (Case c : {Case{1.2, 2}, Case{1.0, 1}, Case{0.8, 0}}) {
        auto f = make_logistic(c.mu);
        auto rep = logistic_repellor(f);
        auto found = search_homoclinic(f, rep, 2, Box{Vec(0.0), Vec(1.3)});
        auto roots = logistic_depth2_roots(c.mu);
        INFO("mu = " << c.mu);
        REQUIRE(found.orbits.size() == c.count);
        REQUIRE(roots.size() == c.count);
        for (size_t i = 0; i < c.count; ++i) {
            CHECK(found.orbits[i].point()[0] == Catch::Approx(roots[i]).margin(1e-7));
            CHECK(found.orbits[i].depth == 2);
        }
    }
}

TEST_CASE("segment identity and tail contraction hold on returned orbits") {
    auto f = make_logistic(1.2);
    auto rep = logistic_repellor(f);
    auto found = search_homoclinic(f, rep, 3, Box{Vec(0.0), Vec(1.3)});
    REQUIRE_FALSE(found.orbits.empty());
    for (const auto& orb : found.orbits) {
        for (size_t i = 0; i + 1 < orb.segment.size(); ++i)
            CHECK(phase_dist(f.space, f(orb.segment[i + 1]), orb.segment[i]) < 1e-10);
        for (size_t i = 0; i + 1 < orb.tail.chain.size(); ++i)
            CHECK(phase_dist(f.space, f(orb.tail.chain[i + 1]), orb.tail.chain[i]) < 1e-10);
        // typed tail contraction beyond the basin entry point
        const Vec p = rep.points[0];
        size_t n0 = static_cast<size_t>(orb.tail.steps_to_basin);
        double base = phase_dist(f.space, orb.tail.chain[n0], p);
        auto ext = extend_tail_into_basin(f, rep, orb.tail.chain.back(), 6);
        double expect = base;
        for (const Vec& z : ext) {
            expect *= orb.tail.contraction;
            CHECK(phase_dist(f.space, z, p) <= expect + 1e-12);
        }
    }
}

TEST_CASE("classification") {
    SECTION("logistic(1.0) tangency orbit is critical through 1/2") {
        auto f = make_logistic(1.0);
        auto rep = logistic_repellor(f);
        auto found = search_homoclinic(f, rep, 2, Box{Vec(0.0), Vec(1.1)});
        REQUIRE(found.orbits.size() == 1);
        const auto& orb = found.orbits[0];
        CHECK(orb.classification == OrbitClass::Critical);
        CHECK(orb.point()[0] == Catch::Approx(0.5).margin(1e-5));
        CHECK(orb.min_abs_det < 1e-8);
    }
    SECTION("doubling orbit is regular, |f'| = 2 everywhere") {
        auto f = make_doubling();
        auto rep = find_periodic(f, Vec(0.1), 1);
        auto found = search_homoclinic(f, rep, 1, Box{Vec(0.0), Vec(kTwoPi)});
        REQUIRE(found.orbits.size() == 1);
        CHECK(found.orbits[0].classification == OrbitClass::Regular);
        CHECK(found.orbits[0].min_abs_det == Catch::Approx(2.0).margin(1e-9));
    }
    SECTION("regular logistic(1.2) root has the oracle derivative") {
        auto f = make_logistic(1.2);
        auto rep = logistic_repellor(f);
        auto found = search_homoclinic(f, rep, 2, Box{Vec(0.0), Vec(1.3)});
        REQUIRE(found.orbits.size() == 2);
        double root = logistic_depth2_roots(1.2)[0];
        double expected = std::abs(4.0 * 1.2 * (1.0 - 2.0 * root));
        CHECK(found.orbits[0].classification == OrbitClass::Regular);
        // the smallest |f'| along this orbit is attained at the root itself
        CHECK(found.orbits[0].min_abs_det == Catch::Approx(expected).margin(1e-6));
    }
    SECTION("classify is monotone in the tolerance") {
        auto f = make_logistic(1.2);
        auto rep = logistic_repellor(f);
        auto found = search_homoclinic(f, rep, 2, Box{Vec(0.0), Vec(1.3)});
        REQUIRE_FALSE(found.orbits.empty());
        const auto& orb = found.orbits[0];
        bool prev_critical = false;
        for (double tol : {1e-10, 1e-6, 1e-2, 1.0, 10.0}) {
            bool critical = classify(orb, tol) == OrbitClass::Critical;
            if (prev_critical) CHECK(critical);
            prev_critical = critical;
        }
    }
}

TEST_CASE("fold tests") {
    SECTION("fold_normal(2) on the critical line") {
        auto f = make_fold_normal(2);
        for (int i = 0; i < 10; ++i) {
            double a1 = -1.0 + 2.0 * quasi_uniform_1d(i);
            auto res = fold_test(f, Vec(a1, 1e-5));
            REQUIRE(res.is_fold);
            CHECK(std::abs(res.cert.det_value) < 1e-8);
            CHECK(std::abs(res.cert.kernel_direction[1]) == Catch::Approx(1.0).margin(1e-9));
            CHECK(std::abs(res.cert.quadratic_coefficient) == Catch::Approx(2.0).margin(1e-5));
        }
    }
    SECTION("off the critical set it is not a fold") {
        auto f = make_fold_normal(2);
        auto res = fold_test(f, Vec(0.3, 0.5));
        CHECK_FALSE(res.is_fold);
    }
    SECTION("logistic fold at 1/2 with curvature -8 mu") {
        for (double mu : {0.9, 1.0, 1.2}) {
            auto f = make_logistic(mu);
            auto res = fold_test(f, Vec(0.48));
            REQUIRE(res.is_fold);
            CHECK(res.cert.point[0] == Catch::Approx(0.5).margin(1e-9));
            CHECK(res.cert.quadratic_coefficient == Catch::Approx(-8.0 * mu).margin(1e-4));
        }
    }
    SECTION("cubic degeneracy is rejected on the quadratic coefficient") {
        MapDefinition cubic;
        cubic.name = "cusp";
        cubic.dimension = 2;
        cubic.space = PhaseSpace::plane;
        cubic.eval_fn = [](const Vec& z) { return Vec(z[0], z[1] * z[1] * z[1]); };
        cubic.jac_fn = [](const Vec& z) {
            Mat j = Mat::identity(2);
            j.at(1, 1) = 3.0 * z[1] * z[1];
            return j;
        };
        auto res = fold_test(cubic, Vec(0.0, 0.0));
        CHECK_FALSE(res.is_fold);
        CHECK(res.failure == "quadratic_coefficient");
    }
}

TEST_CASE("homoclinic class approximation") {
    SECTION("doubling cloud at depth n has exactly 2^n points") {
        auto f = make_doubling();
        auto rep = find_periodic(f, Vec(0.1), 1);
        for (int depth : {0, 1, 2, 5, 8}) {
            auto cloud = homoclinic_class_approx(f, rep, depth);
            CHECK(cloud.size() == (1u << depth));
        }
    }
    SECTION("doubling cloud at depth 8 is the dyadic lattice") {
        auto f = make_doubling();
        auto rep = find_periodic(f, Vec(0.1), 1);
        auto cloud = homoclinic_class_approx(f, rep, 8);
        REQUIRE(cloud.size() == 256);
        for (size_t j = 0; j < cloud.size(); ++j)
            CHECK(std::abs(wrap_signed(cloud[j][0] - kTwoPi * j / 256.0)) < 1e-9);
    }
    SECTION("depth 0 is exactly the cycle") {
        auto f = make_logistic(1.2);
        auto rep = logistic_repellor(f);
        auto cloud = homoclinic_class_approx(f, rep, 0);
        REQUIRE(cloud.size() == 1);
        CHECK(std::abs(cloud[0][0]) < 1e-10);
    }
    SECTION("logistic(1.2) depth-6 cloud stays in the unstable interval") {
        auto f = make_logistic(1.2);
        auto rep = logistic_repellor(f);
        auto w = unstable_interval_1d(f, Vec(0.0), 80);
        auto cloud = homoclinic_class_approx(f, rep, 6);
        CHECK(cloud.size() > 10);
        for (const auto& z : cloud) {
            CHECK(z[0] <= w.upper + 1e-9);
            CHECK(z[0] >= w.lower - 1e-9);
        }
    }
}

TEST_CASE("density checks") {
    auto f = make_doubling();
    auto rep = find_periodic(f, Vec(0.1), 1);
    auto cloud = homoclinic_class_approx(f, rep, 12);
    REQUIRE(cloud.size() == 4096);
    std::vector<Vec> reference;
    for (int i = 0; i < 10000; ++i) reference.push_back(Vec(kTwoPi * i / 10000.0));
    SECTION("depth-12 dyadic cloud is (2 pi / 2^11)-dense") {
        CHECK(density_check(PhaseSpace::circle, cloud, reference, kTwoPi / 2048.0));
        // and the max gap is exactly 2 pi / 2^12: halving eps fails
        CHECK_FALSE(density_check(PhaseSpace::circle, cloud, reference, kTwoPi / 16384.0));
    }
    SECTION("a single point is not dense") {
        std::vector<Vec> single{Vec(0.0)};
        CHECK_FALSE(density_check(PhaseSpace::circle, single, reference, 0.01));
    }
    SECTION("a cloud equal to the reference is dense at any eps") {
        CHECK(density_check(PhaseSpace::circle, reference, reference, 1e-15));
    }
}

TEST_CASE("boundary preimage lemma check") {
    SECTION("logistic below the tangency passes") {
        for (double mu : {0.8, 0.9, 0.95}) {
            auto f = make_logistic(mu);
            auto rep = boundary_preimage_check_1d(f, Vec(0.0));
            INFO("mu = " << mu);
            CHECK(rep.applicable);
            CHECK(rep.passed);
            CHECK_FALSE(rep.inconsistency);
            REQUIRE(rep.endpoints.size() == 2);
            CHECK(rep.endpoints[0].status == "at_infinity");
            CHECK(rep.endpoints[1].value == Catch::Approx(mu).margin(1e-8));
            // image of the right endpoint mu: f(mu) = 4 mu^2 (1 - mu)
            double expected = 4.0 * mu * mu * (1.0 - mu);
            CHECK(rep.endpoints[1].image == Catch::Approx(expected).margin(1e-7));
            CHECK(rep.endpoints[1].dist_to_p > 1e-3);
        }
    }
    SECTION("linear expansion: boundary at infinity, vacuous pass") {
        MapDefinition lin;
        lin.name = "2x";
        lin.dimension = 1;
        lin.space = PhaseSpace::real_line;
        lin.eval_fn = [](const Vec& x) { return Vec(2.0 * x[0]); };
        lin.jac_fn = [](const Vec&) {
            Mat j;
            j.dim = 1;
            j.m[0] = 2.0;
            return j;
        };
        auto rep = boundary_preimage_check_1d(lin, Vec(0.0));
        CHECK(rep.applicable);
        CHECK(rep.passed);
        for (const auto& e : rep.endpoints) CHECK(e.status == "at_infinity");
    }
    SECTION("logistic(1.0): homoclinic orbit exists, not applicable") {
        auto f = make_logistic(1.0);
        auto rep = boundary_preimage_check_1d(f, Vec(0.0));
        CHECK_FALSE(rep.applicable);
        CHECK(rep.homoclinic_orbits_found > 0);
    }
}

TEST_CASE("search preconditions and incompleteness reporting") {
    auto f = make_logistic(1.2);
    auto rep = logistic_repellor(f);
    CHECK_THROWS_AS(search_homoclinic(f, rep, 0, Box{Vec(0.0), Vec(1.0)}), solver_error);
    auto found = search_homoclinic(f, rep, 2, Box{Vec(0.0), Vec(1.3)});
    CHECK(found.candidates_without_tail == 0);
}
