#pragma once

// Periodic-orbit location, expansion certificates, contracting inverse
// branches, and one-dimensional unstable sets.

#include <algorithm>
#include <cmath>
#include <vector>

#include "snapback/geometry.hpp"
#include "snapback/map.hpp"
#include "snapback/newton.hpp"

namespace snapback {

struct branch_domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// pullback machinery
// ---------------------------------------------------------------------------

// One inverse step: solve f(z) = y seeded at `seed`, tracking the target by
// continuation along the path from `from` (= f(seed) up to solver noise) to y.
// Throws branch_domain_error when the continuation cannot cross: that is the
// signature of the branch meeting the critical set or leaving its domain.
inline Vec branch_step(const MapDefinition& f, const Vec& y, const Vec& seed,
                       const Vec& from) {
    for (int pieces : {1, 4, 16, 64}) {
        Vec z = seed;
        bool ok = true;
        for (int j = 1; j <= pieces && ok; ++j) {
            double t = static_cast<double>(j) / pieces;
            Vec target = from + phase_diff(f.space, y, from) * t;
            auto r = solve_preimage(f, target, z);
            if (!r) {
                ok = false;
                break;
            }
            z = *r;
        }
        if (ok) return z;
    }
    throw branch_domain_error("branch-domain violation: pullback toward " + y.str() +
                              " from " + from.str() + " crosses the critical set of " + f.name);
}

// A composition of inverse steps along a fixed backbone of preimages:
// f(backbone[i+1]) = backbone[i].  Applying the chain to y solves the
// backbone-length power of f backwards, staying on the backbone's branch.
struct PullbackChain {
    MapDefinition map;
    std::vector<Vec> backbone;

    int steps() const { return static_cast<int>(backbone.size()) - 1; }

    Vec operator()(const Vec& y) const {
        Vec cur = y;
        Vec from = backbone[0];
        for (size_t i = 1; i < backbone.size(); ++i) {
            cur = branch_step(map, cur, backbone[i], from);
            from = backbone[i];
        }
        return cur;
    }
};

// ---------------------------------------------------------------------------
// inverse branches
// ---------------------------------------------------------------------------

// Local right inverse of f on a metric ball: f(solve(y)) = y for y near
// base_point, with phi(base_point) = branch_value.
struct InverseBranch {
    MapDefinition map;
    Vec base_point;
    Vec branch_value;
    double radius = 0.0;
    double contraction = 0.0;
    double worst_residual = 0.0;

    Vec operator()(const Vec& y) const {
        return branch_step(map, y, branch_value, base_point);
    }
};

namespace detail {

inline std::vector<Vec> ball_probes(const Vec& center, double radius, int n) {
    std::vector<Vec> pts;
    pts.reserve(static_cast<size_t>(n) + 2);
    if (center.dim == 1) {
        pts.push_back(Vec(center[0] - radius));
        pts.push_back(Vec(center[0] + radius));
        for (int i = 0; i < n; ++i) {
            double t = 2.0 * quasi_uniform_1d(i) - 1.0;
            pts.push_back(Vec(center[0] + radius * t));
        }
    } else {
        for (int i = 0; i < n / 2; ++i) {
            double t = kTwoPi * i / (n / 2);
            pts.push_back(center + Vec(std::cos(t), std::sin(t)) * radius);
        }
        for (int i = 0; i < n / 2; ++i) {
            Vec q = quasi_uniform_2d(i);
            double rho = radius * std::sqrt(q[0]);
            double t = kTwoPi * q[1];
            pts.push_back(center + Vec(std::cos(t), std::sin(t)) * rho);
        }
    }
    return pts;
}

}  // namespace detail

inline InverseBranch inverse_branch(const MapDefinition& map, const Vec& x,
                                    const Vec& preimage_guess, double radius) {
    auto a = solve_preimage(map, x, preimage_guess);
    if (!a)
        throw solver_error("inverse_branch: no preimage of " + x.str() + " near " +
                           preimage_guess.str());
    InverseBranch br{map, map.canonical(x), *a, radius, 0.0, 0.0};
    double worst = 0.0, lip = 0.0, pair_ratio = 0.0;
    for (const Vec& y : detail::ball_probes(br.base_point, radius, 100)) {
        Vec z = br(y);  // throws branch_domain_error if the ball crosses S_f
        worst = std::max(worst, phase_dist(map.space, map(z), y));
        double smin = map.jacobian(z).smallest_singular_value();
        if (smin < 1e-12)
            throw branch_domain_error("inverse_branch: critical set inside the ball at " +
                                      z.str());
        lip = std::max(lip, 1.0 / smin);
        double dy = phase_dist(map.space, y, br.base_point);
        if (dy > 1e-9)
            pair_ratio = std::max(pair_ratio, phase_dist(map.space, z, br.branch_value) / dy);
    }
    br.worst_residual = worst;
    br.contraction = std::max(lip, pair_ratio);
    return br;
}

// ---------------------------------------------------------------------------
// periodic orbits
// ---------------------------------------------------------------------------

struct PeriodicOrbit {
    std::vector<Vec> points;  // points[i+1] = f(points[i])
    int period = 1;
    Mat multiplier;           // Df^k at points[0]
    double expansion_margin = 0.0;  // smallest singular value of Df^k minus 1
    double basin_radius = 0.0;      // certified radius, 0 when not expanding
    double basin_contraction = 0.0; // sampled cycle-branch contraction on the ball
};

struct ExpansionCheck {
    bool expanding = false;
    double margin = -1.0;
};

inline ExpansionCheck is_expanding(const PeriodicOrbit& orbit) {
    double smin = orbit.multiplier.smallest_singular_value();
    if (!std::isfinite(smin)) return {false, -1.0};
    return {smin > 1.0, smin - 1.0};
}

// Backbone of one full cycle of inverse steps ending at points[0]:
// pulls a point near points[0] back through the whole periodic orbit.
inline PullbackChain cycle_pullback(const MapDefinition& map, const PeriodicOrbit& orbit) {
    std::vector<Vec> backbone;
    backbone.push_back(orbit.points[0]);
    for (int i = orbit.period - 1; i >= 0; --i) backbone.push_back(orbit.points[static_cast<size_t>(i)]);
    return PullbackChain{map, backbone};
}

struct BasinCertificate {
    double radius = 0.0;
    double contraction = 0.0;
};

// Certified radius r: the cycle's inverse branch maps B_r(p) into B_{0.9 r}(p)
// with sampled contraction below 0.9.  Conservative by design.
inline BasinCertificate certify_basin(const MapDefinition& map, const PeriodicOrbit& orbit) {
    auto check = is_expanding(orbit);
    if (!check.expanding)
        throw solver_error("basin_radius: orbit is not expanding (margin " +
                           std::to_string(check.margin) + ")");
    const Vec p = orbit.points[0];
    PullbackChain chain = cycle_pullback(map, orbit);
    double r = 1.0;
    for (int attempt = 0; attempt < 40; ++attempt, r *= 0.7) {
        bool ok = true;
        double lip = 0.0;
        try {
            for (const Vec& y : detail::ball_probes(p, r, 64)) {
                Vec z = chain(y);
                if (phase_dist(map.space, z, p) > 0.9 * r) {
                    ok = false;
                    break;
                }
                double smin = map.jacobian_power(z, orbit.period).smallest_singular_value();
                if (smin <= 0) {
                    ok = false;
                    break;
                }
                lip = std::max(lip, 1.0 / smin);
            }
        } catch (const std::exception&) {
            ok = false;
        }
        if (ok && lip < 0.9) return {r, lip};
    }
    throw solver_error("basin_radius: could not certify any radius at " + p.str());
}

inline double basin_radius(const MapDefinition& map, const PeriodicOrbit& orbit) {
    return certify_basin(map, orbit).radius;
}

inline PeriodicOrbit find_periodic(const MapDefinition& map, const Vec& guess, int k) {
    if (k < 1) throw solver_error("find_periodic: period must be >= 1");
    Vec x0 = newton_periodic(map, guess, k);
    PeriodicOrbit orbit;
    orbit.period = k;
    orbit.points.push_back(x0);
    for (int i = 1; i < k; ++i) orbit.points.push_back(map(orbit.points.back()));
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (phase_dist(map.space, orbit.points[static_cast<size_t>(i)],
                           orbit.points[static_cast<size_t>(j)]) <= 1e-8)
                throw solver_error("find_periodic: converged to an orbit of lower period than " +
                                   std::to_string(k));
    orbit.multiplier = map.jacobian_power(x0, k);
    orbit.expansion_margin = is_expanding(orbit).margin;
    if (orbit.expansion_margin > 0) {
        auto cert = certify_basin(map, orbit);
        orbit.basin_radius = cert.radius;
        orbit.basin_contraction = cert.contraction;
    }
    return orbit;
}

// ---------------------------------------------------------------------------
// unstable sets in dimension one
// ---------------------------------------------------------------------------

// Closed interval with endpoints in the two-point compactification of R.
struct ExtendedInterval {
    double lower = 0.0;
    double upper = 0.0;

    bool lower_infinite() const { return std::isinf(lower); }
    bool upper_infinite() const { return std::isinf(upper); }
    bool contains(double x) const { return x >= lower && x <= upper; }
};

// product-topology metric on the compactified line, per endpoint
inline double compactified_dist(double a, double b) { return std::abs(std::atan(a) - std::atan(b)); }
inline double interval_dist(const ExtendedInterval& a, const ExtendedInterval& b) {
    return std::max(compactified_dist(a.lower, b.lower), compactified_dist(a.upper, b.upper));
}

namespace detail {

// min/max of f over [a, b]: endpoints plus zeros of f' located by a
// 256-cell scan with bisection refinement
inline std::pair<double, double> image_range_1d(const MapDefinition& f, double a, double b) {
    const int cells = 256;
    auto fv = [&](double x) { return f.eval_fn(Vec(x))[0]; };
    auto fd = [&](double x) { return f.jacobian(Vec(x)).m[0]; };
    double mn = std::min(fv(a), fv(b)), mx = std::max(fv(a), fv(b));
    double prev_x = a, prev_d = fd(a);
    for (int i = 1; i <= cells; ++i) {
        double x = a + (b - a) * i / cells;
        double d = fd(x);
        if (prev_d == 0.0 || prev_d * d < 0) {
            double lo = prev_x, hi = x, dlo = prev_d;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi), dm = fd(mid);
                if (dm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (dlo * dm < 0)
                    hi = mid;
                else {
                    lo = mid;
                    dlo = dm;
                }
            }
            double v = fv(0.5 * (lo + hi));
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        prev_x = x;
        prev_d = d;
    }
    return {mn, mx};
}

}  // namespace detail

constexpr double kUnboundedThreshold = 1e12;  // growth beyond this flags +-infinity

// Closure of the union of forward images of a small ball at p, tracked as an
// extended interval.  Monotone nondecreasing in budget by construction.
inline ExtendedInterval unstable_interval_1d(const MapDefinition& map, const Vec& p,
                                             int budget) {
    if (map.dimension != 1 || map.space != PhaseSpace::real_line)
        throw solver_error("unstable_interval_1d: needs a one-dimensional real-line map");
    const double r0 = 1e-4;
    double lo = p[0] - r0, hi = p[0] + r0;
    bool lo_inf = false, hi_inf = false;
    for (int n = 0; n < budget; ++n) {
        double a = lo_inf ? -kUnboundedThreshold : lo;
        double b = hi_inf ? kUnboundedThreshold : hi;
        auto [mn, mx] = detail::image_range_1d(map, a, b);
        double nlo = lo_inf ? lo : std::min(lo, mn);
        double nhi = hi_inf ? hi : std::max(hi, mx);
        if (nlo < -kUnboundedThreshold) {
            lo_inf = true;
            nlo = -std::numeric_limits<double>::infinity();
        }
        if (nhi > kUnboundedThreshold) {
            hi_inf = true;
            nhi = std::numeric_limits<double>::infinity();
        }
        bool settled = (lo_inf || std::abs(nlo - lo) < 1e-12) &&
                       (hi_inf || std::abs(nhi - hi) < 1e-12);
        lo = nlo;
        hi = nhi;
        if (settled) break;
    }
    return {lo, hi};
}

}  // namespace snapback
