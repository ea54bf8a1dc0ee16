#pragma once

// Homoclinic-orbit search and classification for expanding periodic orbits.
//
// Index convention: an orbit is a sequence with f(x_{n+1}) = x_n, so applying
// f walks toward the front of a stored segment.  segment.front() lies on the
// repellor cycle and segment.back() is the homoclinic point; the backward
// tail continues from segment.back() with preimages converging to the cycle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "snapback/geometry.hpp"
#include "snapback/map.hpp"
#include "snapback/newton.hpp"
#include "snapback/repellor.hpp"

namespace snapback {

enum class OrbitClass { Regular, Critical };
constexpr double kCriticalityTol = 1e-8;

inline std::string orbit_class_name(OrbitClass c) {
    return c == OrbitClass::Regular ? "Regular" : "Critical";
}

struct BackwardTail {
    std::vector<Vec> chain;  // chain[0] = homoclinic point, f(chain[i+1]) = chain[i]
    int steps_to_basin = 0;  // first chain index inside the certified basin ball
    double contraction = 0.0;
};

struct HomoclinicOrbit {
    std::vector<Vec> segment;  // segment.front() in gamma, f(segment[i+1]) = segment[i]
    BackwardTail tail;
    OrbitClass classification = OrbitClass::Regular;
    std::vector<double> criticality;  // |det Df| per segment point, then tail points
    double min_abs_det = std::numeric_limits<double>::infinity();
    int depth = 0;  // iterations of f from the homoclinic point to the landing

    const Vec& point() const { return segment.back(); }
};

inline OrbitClass classify(const HomoclinicOrbit& orbit, double tol = kCriticalityTol) {
    return orbit.min_abs_det < tol ? OrbitClass::Critical : OrbitClass::Regular;
}

struct SearchOptions {
    int seeds_per_dim = 64;
    int tail_seeds_per_dim = 24;
    int tail_max_levels = 40;
    int tail_beam = 8;
    // optional phase-domain restriction (e.g. open-disk membership)
    std::function<bool(const Vec&)> domain_filter;
};

struct SearchResult {
    std::vector<HomoclinicOrbit> orbits;
    // candidates landing on the cycle whose membership in W^u could not be
    // certified within the tail budget; surfaced, never silently dropped
    int candidates_without_tail = 0;
};

// ---------------------------------------------------------------------------
// search domain bookkeeping
// ---------------------------------------------------------------------------

namespace detail {

inline Box whole_circle_box() { return Box{Vec(0.0), Vec(kTwoPi)}; }

inline Box point_ball_box(const Vec& c, double r) {
    Vec lo = c, hi = c;
    for (int i = 0; i < c.dim; ++i) {
        lo[i] -= r;
        hi[i] += r;
    }
    return Box{lo, hi};
}

// bounding box of f(box), sampled (exact extrema scan in 1D)
inline Box image_box(const MapDefinition& f, const Box& b) {
    if (f.dimension == 1) {
        auto [mn, mx] = image_range_1d(f, b.lo[0], b.hi[0]);
        return Box{Vec(mn), Vec(mx)};
    }
    const int n = 24;
    Vec lo(1e300, 1e300), hi(-1e300, -1e300);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            Vec x(b.lo[0] + (b.hi[0] - b.lo[0]) * i / n, b.lo[1] + (b.hi[1] - b.lo[1]) * j / n);
            Vec y = f(x);
            for (int c = 0; c < 2; ++c) {
                lo[c] = std::min(lo[c], y[c]);
                hi[c] = std::max(hi[c], y[c]);
            }
        }
    return Box{lo, hi}.inflated(0.1);
}

// Domain covering the intermediate points of every region-rooted chain into
// the cycle.  Certified chains run inside the unstable set, which forward
// iteration leaves invariant, so in one dimension the finite part of the
// unstable interval (hulled with the region and the basin ball) suffices.
// In dimension two the forward images of the region are hulled directly,
// with a growth cap: chains escaping far outside the working window are
// beyond the search resolution anyway.
inline Box enumeration_domain(const MapDefinition& f, const PeriodicOrbit& repellor,
                              const Box& region, int depth) {
    if (f.space == PhaseSpace::circle) return whole_circle_box();
    Box dom = region;
    for (const Vec& g : repellor.points)
        dom = Box::hull(dom, point_ball_box(g, 2.0 * std::max(repellor.basin_radius, 1e-3)));
    if (f.dimension == 1) {
        auto w = unstable_interval_1d(f, repellor.points[0], 80);
        double span = dom.hi[0] - dom.lo[0];
        if (!w.lower_infinite()) dom.lo[0] = std::min(dom.lo[0], w.lower);
        if (!w.upper_infinite()) dom.hi[0] = std::max(dom.hi[0], w.upper);
        // a thin margin lets Newton grab boundary solutions
        dom.lo[0] -= 0.05 * span;
        dom.hi[0] += 0.05 * span;
        return dom;
    }
    Box base = dom;
    Box cur = region;
    for (int j = 0; j < depth; ++j) {
        cur = image_box(f, cur);
        for (int c = 0; c < f.dimension; ++c) {
            double cap = 4.0 * (base.hi[c] - base.lo[c]) + 1.0;
            double mid = 0.5 * (base.lo[c] + base.hi[c]);
            cur.lo[c] = std::max(cur.lo[c], mid - cap);
            cur.hi[c] = std::min(cur.hi[c], mid + cap);
        }
        dom = Box::hull(dom, cur);
    }
    return dom.inflated(0.02);
}

inline bool near_any(const Vec& x, const std::vector<Vec>& pts, PhaseSpace space, double tol) {
    for (const auto& p : pts)
        if (phase_dist(space, x, p) < tol) return true;
    return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// backward tails: certified membership in the unstable set
// ---------------------------------------------------------------------------

// Beam search over preimage levels from z until the chain enters the
// repellor's certified basin ball.  Sound but incomplete: a missing tail
// within the budget is reported as not-certified, not as nonexistence.
inline std::optional<BackwardTail> certify_backward_tail(const MapDefinition& map,
                                                         const Vec& z,
                                                         const PeriodicOrbit& repellor,
                                                         const Box& domain,
                                                         const SearchOptions& opts = {}) {
    const Vec p = repellor.points[0];
    const double enter_radius = 0.9 * repellor.basin_radius;
    struct Node {
        Vec pt;
        int parent;
    };
    std::vector<Node> nodes{{map.canonical(z), -1}};
    auto build = [&](int idx) {
        std::vector<Vec> chain;
        for (int i = idx; i != -1; i = nodes[static_cast<size_t>(i)].parent)
            chain.push_back(nodes[static_cast<size_t>(i)].pt);
        std::reverse(chain.begin(), chain.end());
        BackwardTail tail;
        tail.chain = std::move(chain);
        tail.steps_to_basin = static_cast<int>(tail.chain.size()) - 1;
        tail.contraction = repellor.basin_contraction;
        return tail;
    };
    if (phase_dist(map.space, z, p) <= enter_radius) return build(0);

    std::vector<int> frontier{0};
    std::vector<Vec> visited{nodes[0].pt};
    for (int level = 1; level <= opts.tail_max_levels; ++level) {
        std::vector<std::pair<double, int>> scored;
        for (int idx : frontier) {
            auto pre = preimages_in_box(map, nodes[static_cast<size_t>(idx)].pt, domain,
                                        opts.tail_seeds_per_dim, opts.domain_filter);
            for (const Vec& w : pre) {
                if (detail::near_any(w, visited, map.space, 1e-9)) continue;
                visited.push_back(w);
                nodes.push_back({w, idx});
                int nidx = static_cast<int>(nodes.size()) - 1;
                double d = phase_dist(map.space, w, p);
                if (d <= enter_radius) return build(nidx);
                scored.emplace_back(d, nidx);
            }
        }
        if (scored.empty()) return std::nullopt;
        std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return lex_less(nodes[static_cast<size_t>(a.second)].pt,
                            nodes[static_cast<size_t>(b.second)].pt);
        });
        frontier.clear();
        for (size_t i = 0; i < scored.size() && i < static_cast<size_t>(opts.tail_beam); ++i)
            frontier.push_back(scored[i].second);
    }
    return std::nullopt;
}

// A few extra pullbacks through the repellor cycle, used when sampling the
// criticality of the tail beyond its certified chain.
inline std::vector<Vec> extend_tail_into_basin(const MapDefinition& map,
                                               const PeriodicOrbit& repellor,
                                               const Vec& start, int extra) {
    std::vector<Vec> out;
    PullbackChain chain = cycle_pullback(map, repellor);
    Vec cur = start;
    for (int i = 0; i < extra; ++i) {
        cur = chain(cur);
        out.push_back(cur);
    }
    return out;
}

// ---------------------------------------------------------------------------
// homoclinic search
// ---------------------------------------------------------------------------

inline SearchResult search_homoclinic(const MapDefinition& map, const PeriodicOrbit& repellor,
                                      int depth, const Box& region,
                                      const SearchOptions& opts = {}) {
    if (depth < 1) throw solver_error("search_homoclinic: depth must be >= 1");
    if (!is_expanding(repellor).expanding)
        throw solver_error("search_homoclinic: repellor is not expanding");

    const Box dom = detail::enumeration_domain(map, repellor, region, depth);

    struct Node {
        Vec pt;
        int parent;
        int level;
    };
    std::vector<Node> nodes;
    std::vector<int> frontier;
    for (const Vec& g : repellor.points) {
        nodes.push_back({g, -1, 0});
        frontier.push_back(static_cast<int>(nodes.size()) - 1);
    }
    std::vector<int> candidates;
    for (int level = 1; level <= depth; ++level) {
        std::vector<int> next;
        std::vector<Vec> level_pts;
        for (int idx : frontier) {
            auto pre = preimages_in_box(map, nodes[static_cast<size_t>(idx)].pt, dom,
                                        opts.seeds_per_dim, opts.domain_filter);
            for (const Vec& w : pre) {
                if (detail::near_any(w, repellor.points, map.space, 1e-9)) continue;
                if (detail::near_any(w, level_pts, map.space, kDedupTol)) continue;
                level_pts.push_back(w);
                nodes.push_back({w, idx, level});
                next.push_back(static_cast<int>(nodes.size()) - 1);
            }
        }
        for (int idx : next)
            if (region.contains(nodes[static_cast<size_t>(idx)].pt, 1e-9))
                candidates.push_back(idx);
        frontier = std::move(next);
        if (frontier.empty()) break;
    }

    // an orbit is represented by its deepest point: candidates that appear on
    // the parent chain of another candidate are ancestors, not new orbits
    std::vector<bool> is_ancestor(nodes.size(), false);
    for (int idx : candidates)
        for (int i = nodes[static_cast<size_t>(idx)].parent; i != -1;
             i = nodes[static_cast<size_t>(i)].parent)
            is_ancestor[static_cast<size_t>(i)] = true;

    SearchResult result;
    for (int idx : candidates) {
        if (is_ancestor[static_cast<size_t>(idx)]) continue;
        const Node& node = nodes[static_cast<size_t>(idx)];
        auto tail = certify_backward_tail(map, node.pt, repellor, dom, opts);
        if (!tail) {
            ++result.candidates_without_tail;
            continue;
        }
        HomoclinicOrbit orbit;
        orbit.depth = node.level;
        for (int i = idx; i != -1; i = nodes[static_cast<size_t>(i)].parent)
            orbit.segment.push_back(nodes[static_cast<size_t>(i)].pt);
        std::reverse(orbit.segment.begin(), orbit.segment.end());
        orbit.tail = *tail;

        std::vector<Vec> crit_pts = orbit.segment;
        crit_pts.insert(crit_pts.end(), tail->chain.begin() + 1, tail->chain.end());
        auto deeper = extend_tail_into_basin(map, repellor, tail->chain.back(), 8);
        crit_pts.insert(crit_pts.end(), deeper.begin(), deeper.end());
        for (const Vec& x : crit_pts) {
            double d = std::abs(map.jacobian(x).det());
            orbit.criticality.push_back(d);
            orbit.min_abs_det = std::min(orbit.min_abs_det, d);
        }
        orbit.classification = classify(orbit);
        result.orbits.push_back(std::move(orbit));
    }
    std::sort(result.orbits.begin(), result.orbits.end(),
              [](const HomoclinicOrbit& a, const HomoclinicOrbit& b) {
                  if (a.depth != b.depth) return a.depth < b.depth;
                  return lex_less(a.point(), b.point());
              });
    return result;
}

// ---------------------------------------------------------------------------
// fold certificates
// ---------------------------------------------------------------------------

struct FoldCertificate {
    Vec point;
    double det_value = 0.0;
    Vec gradient_of_det;
    Vec kernel_direction;
    double quadratic_coefficient = 0.0;
};

struct FoldTestResult {
    bool is_fold = false;
    FoldCertificate cert;
    std::string failure;  // name of the first failed inequality
};

namespace detail {

inline double det_at(const MapDefinition& f, const Vec& x) { return f.jacobian(x).det(); }

inline Vec det_gradient(const MapDefinition& f, const Vec& x) {
    double h = f.has_analytic_jacobian() ? 1e-6 : 1e-4;
    Vec g = x;
    for (int i = 0; i < f.dimension; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (det_at(f, xp) - det_at(f, xm)) / (2.0 * h);
    }
    return g;
}

}  // namespace detail

// Refines c onto {det Df = 0} along the determinant gradient, then checks the
// certificate inequalities.  In one dimension this degenerates to f'(c) = 0
// with f''(c) != 0.  Refinement is local: a query far from the critical set
// is not dragged onto it, it simply fails the determinant check.
inline FoldTestResult fold_test(const MapDefinition& map, Vec c) {
    FoldTestResult res;
    c = map.canonical(c);
    Vec refined = polish_to_critical_set(map, c);
    if (phase_dist(map.space, refined, c) <= 0.05 * (1.0 + c.norm())) c = refined;
    FoldCertificate& cert = res.cert;
    cert.point = c;
    cert.det_value = detail::det_at(map, c);
    cert.gradient_of_det = detail::det_gradient(map, c);
    Mat j = map.jacobian(c);
    cert.kernel_direction = j.kernel_direction();
    Vec u = j.left_null_direction();
    const double h = 1e-4;
    Vec xp = c + cert.kernel_direction * h;
    Vec xm = c - cert.kernel_direction * h;
    Vec second = map.eval_fn(xp) - map.eval_fn(c) * 2.0 + map.eval_fn(xm);
    cert.quadratic_coefficient = u.dot(second) * (1.0 / (h * h));

    if (std::abs(cert.det_value) >= 1e-8) {
        res.failure = "det_value";
        return res;
    }
    if (std::abs(cert.quadratic_coefficient) <= 1e-6) {
        res.failure = "quadratic_coefficient";
        return res;
    }
    if (cert.gradient_of_det.norm() <= 1e-6) {
        res.failure = "gradient_of_det";
        return res;
    }
    res.is_fold = true;
    return res;
}

// ---------------------------------------------------------------------------
// homoclinic classes and density
// ---------------------------------------------------------------------------

// Preimage tree of the cycle restricted to points with a certified backward
// tail: the computable part of the homoclinic class at finite depth.
inline std::vector<Vec> homoclinic_class_approx(const MapDefinition& map,
                                                const PeriodicOrbit& repellor, int depth,
                                                std::optional<Box> region = std::nullopt,
                                                const SearchOptions& opts_in = {}) {
    SearchOptions opts = opts_in;
    Box dom;
    if (map.space == PhaseSpace::circle) {
        dom = detail::whole_circle_box();
    } else if (region) {
        dom = detail::enumeration_domain(map, repellor, *region, depth);
    } else if (map.dimension == 1) {
        auto w = unstable_interval_1d(map, repellor.points[0], 80);
        double p0 = repellor.points[0][0];
        double lo = std::max(w.lower, p0 - 50.0), hi = std::min(w.upper, p0 + 50.0);
        dom = Box{Vec(lo - 1e-6), Vec(hi + 1e-6)};
        for (const Vec& g : repellor.points)
            dom = Box::hull(dom, detail::point_ball_box(g, 2.0 * repellor.basin_radius));
    } else {
        throw solver_error("homoclinic_class_approx: a region is required in dimension 2");
    }

    std::vector<Vec> cloud = repellor.points;  // depth 0: exactly the cycle
    std::vector<Vec> frontier = repellor.points;
    for (int level = 1; level <= depth && !frontier.empty(); ++level) {
        std::vector<Vec> next;
        for (const Vec& t : frontier) {
            auto pre = preimages_in_box(map, t, dom, opts.seeds_per_dim, opts.domain_filter);
            for (const Vec& w : pre) {
                if (detail::near_any(w, cloud, map.space, kDedupTol)) continue;
                if (detail::near_any(w, next, map.space, kDedupTol)) continue;
                next.push_back(w);
            }
        }
        for (const Vec& w : next) cloud.push_back(w);
        frontier = std::move(next);
    }

    std::vector<Vec> certified;
    for (const Vec& z : cloud) {
        if (detail::near_any(z, repellor.points, map.space, 1e-12) ||
            certify_backward_tail(map, z, repellor, dom, opts))
            certified.push_back(z);
    }
    std::sort(certified.begin(), certified.end(), lex_less);
    return certified;
}

// true iff every reference point has a cloud point within eps
inline bool density_check(PhaseSpace space, const std::vector<Vec>& cloud,
                          const std::vector<Vec>& reference, double eps) {
    if (cloud.empty() || reference.empty())
        throw solver_error("density_check: clouds must be nonempty");
    if (cloud.front().dim == 1) {
        std::vector<double> xs;
        xs.reserve(cloud.size());
        for (const auto& c : cloud) xs.push_back(c[0]);
        std::sort(xs.begin(), xs.end());
        for (const auto& r : reference) {
            auto it = std::lower_bound(xs.begin(), xs.end(), r[0]);
            double best = 1e300;
            if (it != xs.end()) best = std::min(best, std::abs(*it - r[0]));
            if (it != xs.begin()) best = std::min(best, std::abs(*(it - 1) - r[0]));
            if (space == PhaseSpace::circle) {
                best = std::min(best, std::abs(wrap_signed(xs.front() - r[0])));
                best = std::min(best, std::abs(wrap_signed(xs.back() - r[0])));
            }
            if (best > eps) return false;
        }
        return true;
    }
    for (const auto& r : reference) {
        bool hit = false;
        for (const auto& c : cloud) {
            if (phase_dist(space, c, r) <= eps) {
                hit = true;
                break;
            }
        }
        if (!hit) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// boundary preimages (one-dimensional lemma check)
// ---------------------------------------------------------------------------

struct BoundaryEndpointReport {
    bool infinite = false;
    double value = 0.0;
    double image = 0.0;
    double dist_to_p = 0.0;
    bool preimage_of_p = false;
    std::string status;  // at_infinity | fixed | period_two | other
};

struct BoundaryPreimageReport {
    bool applicable = false;  // false when a homoclinic orbit exists at the depth
    bool passed = false;
    bool inconsistency = false;
    int homoclinic_orbits_found = 0;
    ExtendedInterval w;
    std::vector<BoundaryEndpointReport> endpoints;
};

inline BoundaryPreimageReport boundary_preimage_check_1d(const MapDefinition& map,
                                                         const Vec& p, int depth = 6) {
    if (map.dimension != 1 || map.space != PhaseSpace::real_line)
        throw solver_error("boundary_preimage_check_1d: needs a 1D real-line map");
    BoundaryPreimageReport rep;
    auto repellor = find_periodic(map, p, 1);
    rep.w = unstable_interval_1d(map, p, 80);
    double lo = rep.w.lower_infinite() ? -1.0 : rep.w.lower - 1.0;
    double hi = rep.w.upper_infinite() ? 1.0 : rep.w.upper + 1.0;
    Box region{Vec(std::min(lo, p[0] - 1.0)), Vec(std::max(hi, p[0] + 1.0))};
    auto found = search_homoclinic(map, repellor, depth, region);
    rep.homoclinic_orbits_found = static_cast<int>(found.orbits.size());
    if (!found.orbits.empty()) {
        rep.applicable = false;  // lemma hypotheses fail: nothing to check
        return rep;
    }
    rep.applicable = true;
    rep.passed = true;
    for (double b : {rep.w.lower, rep.w.upper}) {
        BoundaryEndpointReport e;
        if (std::isinf(b)) {
            e.infinite = true;
            e.status = "at_infinity";
            rep.endpoints.push_back(e);
            continue;
        }
        e.value = b;
        e.image = map(Vec(b))[0];
        e.dist_to_p = std::abs(e.image - p[0]);
        e.preimage_of_p = e.dist_to_p < 1e-8;
        if (std::abs(e.image - b) < 1e-9)
            e.status = "fixed";
        else if (std::abs(map.iterate(Vec(b), 2)[0] - b) < 1e-9)
            e.status = "period_two";
        else
            e.status = "other";
        if (e.preimage_of_p) {
            rep.passed = false;
            rep.inconsistency = true;  // boundary preimage with no homoclinic orbit found
        }
        rep.endpoints.push_back(e);
    }
    return rep;
}

}  // namespace snapback
