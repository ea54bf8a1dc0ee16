#pragma once

// Finite-depth realization of the horseshoe-for-repellors construction: a
// regular homoclinic orbit yields two contracting inverse branches of f^m on
// a ball U around the cycle; their attractor is an expanding Cantor set on
// which f^m acts as the full one-sided 2-shift.  Everything here verifies
// that picture at finite depth with explicit tolerances.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "snapback/geometry.hpp"
#include "snapback/homoclinic.hpp"
#include "snapback/map.hpp"
#include "snapback/repellor.hpp"

namespace snapback {

struct PowerBranch {
    PullbackChain chain;        // backbone of power+1 points, single f-steps
    double contraction = 0.0;   // sampled sup of 1/sigma_min(Df^m) on the image
    double expansion_floor = 0.0;  // sampled inf of 1/sigma_max: inverse Lipschitz bound
    Vec center_image;           // chain applied to the domain center
    Vec fault_offset;           // fault injection for verification tests

    Vec operator()(const Vec& y) const {
        Vec z = chain(y);
        if (fault_offset.norm() > 0) z = chain.map.canonical(z + fault_offset);
        return z;
    }
};

struct BranchSystem {
    MapDefinition map;
    int power = 0;  // m
    Vec center;
    double radius = 0.0;
    std::vector<PowerBranch> branches;
    double separation = 0.0;

    double max_contraction() const {
        double c = 0.0;
        for (const auto& b : branches) c = std::max(c, b.contraction);
        return c;
    }
    double min_expansion_floor() const {
        double c = 1.0;
        for (const auto& b : branches) c = std::min(c, b.expansion_floor);
        return c;
    }
    int alphabet() const { return static_cast<int>(branches.size()); }
};

using ItineraryWord = std::vector<int>;

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

namespace detail {

// single-step pullback points of one full cycle, starting from z near the
// cycle base point
inline std::vector<Vec> cycle_pullback_points(const MapDefinition& map,
                                              const PeriodicOrbit& orbit, const Vec& z) {
    std::vector<Vec> out;
    Vec cur = z;
    Vec from = orbit.points[0];
    for (int i = orbit.period - 1; i >= 0; --i) {
        cur = branch_step(map, cur, orbit.points[static_cast<size_t>(i)], from);
        from = orbit.points[static_cast<size_t>(i)];
        out.push_back(cur);
    }
    return out;
}

}  // namespace detail

// Builds the two-branch system: branch 0 follows the repellor's own inverse
// cycle, branch 1 follows the homoclinic loop.  The power m grows (in cycle
// multiples) until both branches map U strictly into U with ball-certified
// separation of at least five percent of diam(U).
inline BranchSystem build_branch_system(const MapDefinition& map, const HomoclinicOrbit& orbit,
                                        const PeriodicOrbit& repellor, int max_power = 64) {
    if (orbit.classification == OrbitClass::Critical || classify(orbit) == OrbitClass::Critical)
        throw solver_error("build_branch_system: requires a Regular homoclinic orbit");
    const int k = repellor.period;
    const Vec landing = orbit.segment.front();
    if (phase_dist(map.space, landing, repellor.points[0]) > 1e-9)
        throw solver_error("build_branch_system: orbit must land on the cycle base point");
    const Vec center = repellor.points[0];
    const double radius = 0.8 * repellor.basin_radius;

    // backward loop through the homoclinic orbit: segment, certified tail,
    // then the repellor cycle branch until it has converged back to center
    std::vector<Vec> loop = orbit.segment;
    loop.insert(loop.end(), orbit.tail.chain.begin() + 1, orbit.tail.chain.end());
    while (static_cast<int>(loop.size()) < max_power + 2) {
        auto ext = detail::cycle_pullback_points(map, repellor, loop.back());
        loop.insert(loop.end(), ext.begin(), ext.end());
    }

    std::string diag;
    for (int m = k; m <= max_power; m += k) {
        if (phase_dist(map.space, loop[static_cast<size_t>(m)], center) > radius) {
            diag = "loop endpoint still outside U at m=" + std::to_string(m);
            continue;
        }
        std::vector<Vec> backbone0, backbone1;
        for (int i = 0; i <= m; ++i) {
            backbone0.push_back(repellor.points[static_cast<size_t>(
                (k - (i % k)) % k)]);
            backbone1.push_back(loop[static_cast<size_t>(i)]);
        }
        BranchSystem sys{map, m, center, radius, {}, 0.0};
        bool ok = true;
        for (const auto& backbone : {backbone0, backbone1}) {
            PowerBranch br{PullbackChain{map, backbone}, 0.0, 1.0, Vec(), Vec()};
            try {
                br.center_image = br(center);
                for (const Vec& y : detail::ball_probes(center, radius, 16)) {
                    Vec z = br(y);
                    Mat jp = map.jacobian_power(z, m);
                    double smin = jp.smallest_singular_value();
                    if (smin <= 0) throw branch_domain_error("degenerate branch image");
                    br.contraction = std::max(br.contraction, 1.0 / smin);
                    br.expansion_floor =
                        std::min(br.expansion_floor, 1.0 / jp.largest_singular_value());
                }
            } catch (const std::exception& e) {
                diag = std::string("branch failed at m=") + std::to_string(m) + ": " + e.what();
                ok = false;
                break;
            }
            if (br.contraction >= 1.0) {
                diag = "branch not contracting at m=" + std::to_string(m);
                ok = false;
                break;
            }
            double reach = phase_dist(map.space, br.center_image, center) +
                           br.contraction * radius;
            if (reach > 0.999 * radius) {
                diag = "branch image not strictly inside U at m=" + std::to_string(m);
                ok = false;
                break;
            }
            sys.branches.push_back(std::move(br));
        }
        if (!ok) continue;
        double center_gap = phase_dist(map.space, sys.branches[0].center_image,
                                       sys.branches[1].center_image);
        sys.separation = center_gap - (sys.branches[0].contraction +
                                       sys.branches[1].contraction) * radius;
        if (sys.separation < 0.05 * (2.0 * radius)) {
            diag = "separation " + std::to_string(sys.separation) + " too small at m=" +
                   std::to_string(m);
            continue;
        }
        return sys;
    }
    throw solver_error("build_branch_system: no power up to " + std::to_string(max_power) +
                       " separates the branches (" + diag + ")");
}

// ---------------------------------------------------------------------------
// cylinders and the shift
// ---------------------------------------------------------------------------

inline Vec cylinder_point(const BranchSystem& sys, const ItineraryWord& word) {
    if (word.empty()) throw solver_error("cylinder_point: word must be nonempty");
    Vec z = sys.center;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        if (*it < 0 || *it >= sys.alphabet())
            throw solver_error("cylinder_point: letter out of alphabet range");
        z = sys.branches[static_cast<size_t>(*it)](z);
    }
    return z;
}

struct ConjugacyReport {
    int depth = 0;
    double tol = 0.0;
    double worst_residual = 0.0;
    long cylinder_count = 0;
    long expected_count = 0;
    double distinct_tol = 0.0;
    int failures = 0;
    bool pass = false;
};

// For every word of length <= depth, f^m applied to the word's cylinder
// point must land on the shifted word's point within tol plus the cylinder
// diameter bound; the depth-level points must be pairwise distinct.
inline ConjugacyReport verify_shift_conjugacy(const BranchSystem& sys, int depth, double tol) {
    ConjugacyReport rep;
    rep.depth = depth;
    rep.tol = tol;
    const int B = sys.alphabet();
    const double cmax = sys.max_contraction();
    std::vector<std::vector<Vec>> levels(static_cast<size_t>(depth) + 1);
    levels[0] = {sys.center};
    for (int l = 1; l <= depth; ++l) {
        const auto& prev = levels[static_cast<size_t>(l - 1)];
        auto& cur = levels[static_cast<size_t>(l)];
        cur.resize(prev.size() * static_cast<size_t>(B));
        for (int letter = 0; letter < B; ++letter)
            for (size_t r = 0; r < prev.size(); ++r)
                cur[static_cast<size_t>(letter) * prev.size() + r] =
                    sys.branches[static_cast<size_t>(letter)](prev[r]);
        double diam_bound = 2.0 * sys.radius * std::pow(cmax, l);
        for (size_t w = 0; w < cur.size(); ++w) {
            Vec fw = sys.map.iterate(cur[w], sys.power);
            double r = phase_dist(sys.map.space, fw, prev[w % prev.size()]);
            rep.worst_residual = std::max(rep.worst_residual, r);
            if (r >= tol + diam_bound) ++rep.failures;
        }
    }
    rep.expected_count = 1;
    for (int l = 0; l < depth; ++l) rep.expected_count *= B;
    // leaves differing first at position j sit in disjoint level-j images
    // separated by sys.separation, shrunk through at most depth-1 outer
    // pullbacks, each expanding distances by no less than the floor
    rep.distinct_tol = 0.5 * sys.separation * std::pow(sys.min_expansion_floor(), depth - 1);
    std::vector<Vec> leaves = levels[static_cast<size_t>(depth)];
    std::sort(leaves.begin(), leaves.end(), lex_less);
    rep.cylinder_count = 1;
    for (size_t i = 1; i < leaves.size(); ++i)
        if (phase_dist(sys.map.space, leaves[i], leaves[i - 1]) > rep.distinct_tol)
            ++rep.cylinder_count;
    rep.pass = rep.failures == 0 && rep.cylinder_count == rep.expected_count;
    return rep;
}

// ---------------------------------------------------------------------------
// isolation
// ---------------------------------------------------------------------------

struct IsolationReport {
    int depth = 0;
    int off_cylinder_samples = 0;
    int escaped = 0;
    int cylinder_points_checked = 0;
    int cylinder_points_stayed = 0;
    bool pass = false;
};

// The isolating neighborhood is the union of the level-1 branch images
// (ball-bounded); the construction ball U itself may carry unrelated
// invariant dynamics.  Samples of the neighborhood away from the depth-level
// cylinders must leave it within depth*m iterations of f; cylinder points
// must return into it under every f^m step.
inline IsolationReport verify_isolation(const BranchSystem& sys, const MapDefinition& map,
                                        int depth, int n_samples = 1000,
                                        unsigned long long seed = 1) {
    IsolationReport rep;
    rep.depth = depth;
    const double cmax = sys.max_contraction();
    auto in_iso = [&](const Vec& x) {
        for (const auto& b : sys.branches)
            if (phase_dist(map.space, x, b.center_image) <= b.contraction * sys.radius + 1e-12)
                return true;
        return false;
    };

    std::vector<Vec> leaves{sys.center};
    for (int l = 0; l < depth; ++l) {
        std::vector<Vec> next;
        next.reserve(leaves.size() * sys.branches.size());
        for (const auto& b : sys.branches)
            for (const Vec& z : leaves) next.push_back(b(z));
        leaves = std::move(next);
    }
    double leaf_radius = sys.radius * std::pow(cmax, depth);
    auto in_depth_cylinder = [&](const Vec& x) {
        for (const Vec& c : leaves)
            if (phase_dist(map.space, x, c) <= leaf_radius + 1e-12) return true;
        return false;
    };

    // samples: interior of the isolating balls plus their boundaries
    std::vector<Vec> samples;
    SeededRng rng(seed);
    while (static_cast<int>(samples.size()) < n_samples) {
        const PowerBranch& b = sys.branches[rng.next_u64() % sys.branches.size()];
        double r = b.contraction * sys.radius;
        Vec x;
        if (sys.center.dim == 1) {
            x = Vec(b.center_image[0] + rng.next_in(-r, r));
        } else {
            double rho = r * std::sqrt(rng.next_double());
            double t = kTwoPi * rng.next_double();
            x = b.center_image + Vec(rho * std::cos(t), rho * std::sin(t));
        }
        samples.push_back(map.canonical(x));
    }
    for (const auto& b : sys.branches) {
        double r = b.contraction * sys.radius;
        if (sys.center.dim == 1) {
            samples.push_back(map.canonical(Vec(b.center_image[0] - r)));
            samples.push_back(map.canonical(Vec(b.center_image[0] + r)));
        } else {
            for (int i = 0; i < 16; ++i) {
                double t = kTwoPi * i / 16.0;
                samples.push_back(b.center_image + Vec(r * std::cos(t), r * std::sin(t)));
            }
        }
    }

    for (const Vec& x0 : samples) {
        if (in_depth_cylinder(x0)) continue;
        ++rep.off_cylinder_samples;
        Vec x = x0;
        bool escaped = !in_iso(x);
        for (int j = 0; j < depth * sys.power && !escaped; ++j) {
            x = map(x);
            if (!in_iso(x)) escaped = true;
        }
        if (escaped) ++rep.escaped;
    }

    for (const Vec& c : leaves) {
        ++rep.cylinder_points_checked;
        Vec x = c;
        bool stayed = in_iso(x);
        for (int j = 0; j < depth && stayed; ++j) {
            x = map.iterate(x, sys.power);
            if (!in_iso(x)) stayed = false;
        }
        if (stayed) ++rep.cylinder_points_stayed;
    }

    rep.pass = rep.escaped == rep.off_cylinder_samples &&
               rep.cylinder_points_stayed == rep.cylinder_points_checked;
    return rep;
}

// ---------------------------------------------------------------------------
// expansion constants
// ---------------------------------------------------------------------------

struct ExpansionCertificate {
    double C = 0.0;
    double lambda = 0.0;
    int depth = 0;
    std::vector<double> min_ratio_log;  // index n-1: min over samples of log |Df^n v|/|v|
    bool expanding = false;
    Vec attaining_point;
    int attaining_n = 0;
};

// Fits the largest lambda (the minimal growth slope) and then the largest C
// such that |Df^n v| >= C lambda^n |v| over all samples, n <= n_max, and
// eight seeded unit vectors per sample.
inline ExpansionCertificate expansion_certificate(const MapDefinition& map,
                                                  const std::vector<Vec>& cloud, int n_max,
                                                  int n_vectors = 8,
                                                  unsigned long long seed = 1) {
    if (cloud.empty() || n_max < 1)
        throw solver_error("expansion_certificate: need a nonempty cloud and n_max >= 1");
    ExpansionCertificate cert;
    cert.depth = n_max;
    cert.min_ratio_log.assign(static_cast<size_t>(n_max),
                              std::numeric_limits<double>::infinity());
    std::vector<Vec> attaining(static_cast<size_t>(n_max));
    SeededRng rng(seed);
    for (const Vec& x : cloud) {
        std::vector<Vec> vs;
        if (x.dim == 1) {
            vs.push_back(Vec(1.0));
        } else {
            for (int i = 0; i < n_vectors; ++i) {
                double t = kTwoPi * rng.next_double();
                vs.push_back(Vec(std::cos(t), std::sin(t)));
            }
        }
        Mat j = Mat::identity(x.dim);
        Vec z = x;
        for (int n = 1; n <= n_max; ++n) {
            j = map.jacobian(z) * j;
            z = map(z);
            for (const Vec& v : vs) {
                double r = (j * v).norm() / v.norm();
                double lr = std::log(r);
                if (lr < cert.min_ratio_log[static_cast<size_t>(n - 1)]) {
                    cert.min_ratio_log[static_cast<size_t>(n - 1)] = lr;
                    attaining[static_cast<size_t>(n - 1)] = x;
                }
            }
        }
    }
    double slope = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= n_max; ++n) {
        double s = cert.min_ratio_log[static_cast<size_t>(n - 1)] / n;
        if (s < slope) {
            slope = s;
            cert.attaining_n = n;
            cert.attaining_point = attaining[static_cast<size_t>(n - 1)];
        }
    }
    cert.lambda = std::exp(slope);
    double logc = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= n_max; ++n)
        logc = std::min(logc, cert.min_ratio_log[static_cast<size_t>(n - 1)] - n * slope);
    cert.C = std::exp(logc);
    cert.expanding = cert.lambda > 1.0;
    return cert;
}

// ---------------------------------------------------------------------------
// periodic points from itineraries
// ---------------------------------------------------------------------------

// Unique fixed point of the word's branch composition, by Banach iteration;
// periodic for f^(m |word|).
inline Vec periodic_from_word(const BranchSystem& sys, const ItineraryWord& word) {
    if (word.empty()) throw solver_error("periodic_from_word: word must be nonempty");
    Vec z = sys.center;
    for (int it = 0; it < 200; ++it) {
        Vec next = z;
        for (auto r = word.rbegin(); r != word.rend(); ++r)
            next = sys.branches[static_cast<size_t>(*r)](next);
        double step = phase_dist(sys.map.space, next, z);
        z = next;
        if (step < 1e-13) break;
    }
    double res = phase_dist(sys.map.space,
                            sys.map.iterate(z, sys.power * static_cast<int>(word.size())), z);
    if (res >= 1e-9)
        throw solver_error("periodic_from_word: residual " + std::to_string(res));
    return z;
}

}  // namespace snapback
