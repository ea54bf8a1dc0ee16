#pragma once

// Codimension-one crossing analysis at a fold (the sign-normalized crossing
// functional and its side classification), superstable parameter location,
// and the one-dimensional bifurcation dichotomy: track the unstable interval
// W(mu), locate the boundary parameter mu0, and report which alternative of
// the dichotomy holds there.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "snapback/geometry.hpp"
#include "snapback/homoclinic.hpp"
#include "snapback/map.hpp"
#include "snapback/repellor.hpp"

namespace snapback {

// ---------------------------------------------------------------------------
// crossing functional
// ---------------------------------------------------------------------------

// Signed offset, along the image of the fold's normal direction, between the
// repellor and the forward chain of the critical point.  Sign convention:
// positive means the repellor has no local preimage chain through the fold
// (the no-homoclinic side); the functional vanishes exactly on the boundary.
inline double crossing_functional(const ParametricFamily& family, double mu,
                                  const Vec& fold_point, int chain_length,
                                  double reach = 4.0) {
    MapDefinition map = family.at(mu);
    auto ft = fold_test(map, fold_point);
    if (!ft.is_fold)
        throw solver_error("crossing_functional: fold certificate failed (" + ft.failure +
                           ") at mu=" + std::to_string(mu));
    const Vec c = ft.cert.point;
    const Vec p = family.repellor_point;
    Vec w = map.iterate(c, chain_length);
    if (phase_dist(map.space, w, p) > reach)
        throw solver_error("crossing_functional: chain of length " +
                           std::to_string(chain_length) + " does not reach the repellor");
    // push the fold's outward normal (the side carrying no preimages) through
    // the rest of the chain
    Vec u = map.jacobian(c).left_null_direction();
    double a = ft.cert.quadratic_coefficient;
    Vec v = map(c);
    Mat dchain = map.jacobian_power(v, chain_length - 1);
    Vec d = dchain * (u * (a >= 0 ? 1.0 : -1.0));
    double dn = d.norm();
    if (dn < 1e-12)
        throw solver_error("crossing_functional: chain derivative degenerates");
    return phase_diff(map.space, w, p).dot(d) / dn;
}

// ---------------------------------------------------------------------------
// side classification
// ---------------------------------------------------------------------------

enum class CrossingSide { HasRegularHomoclinic, Boundary, NoLocalHomoclinic };

inline std::string crossing_side_name(CrossingSide s) {
    switch (s) {
        case CrossingSide::HasRegularHomoclinic: return "HasRegularHomoclinic";
        case CrossingSide::Boundary: return "Boundary";
        case CrossingSide::NoLocalHomoclinic: return "NoLocalHomoclinic";
    }
    return "?";
}

struct CrossingReport {
    double functional_value = 0.0;
    CrossingSide side = CrossingSide::Boundary;
    int local_orbit_count = 0;
    bool consistent = false;  // sign of the functional versus the direct count
    std::vector<HomoclinicOrbit> orbits;
};

// The direct local search is authoritative for the orbit count; the
// functional provides the side.  Disagreements are reported, never resolved.
inline CrossingReport side_classify(const ParametricFamily& family, double mu,
                                    const Vec& fold_point, const Box& region,
                                    int chain_length = 2, int depth = 2) {
    CrossingReport rep;
    rep.functional_value = crossing_functional(family, mu, fold_point, chain_length);
    if (std::abs(rep.functional_value) < 1e-9)
        rep.side = CrossingSide::Boundary;
    else if (rep.functional_value < 0)
        rep.side = CrossingSide::HasRegularHomoclinic;
    else
        rep.side = CrossingSide::NoLocalHomoclinic;

    MapDefinition map = family.at(mu);
    auto repellor = find_periodic(map, family.repellor_point, 1);
    auto found = search_homoclinic(map, repellor, depth, region);
    rep.orbits = std::move(found.orbits);
    rep.local_orbit_count = static_cast<int>(rep.orbits.size());

    switch (rep.side) {
        case CrossingSide::HasRegularHomoclinic:
            rep.consistent = rep.local_orbit_count == 2;
            break;
        case CrossingSide::NoLocalHomoclinic:
            rep.consistent = rep.local_orbit_count == 0;
            break;
        case CrossingSide::Boundary:
            rep.consistent = rep.local_orbit_count == 1 &&
                             rep.orbits[0].classification == OrbitClass::Critical;
            break;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// critical periodic points (superstable parameters)
// ---------------------------------------------------------------------------

struct CriticalPeriodicPoint {
    double mu = 0.0;
    int n = 0;
    Vec point;
    double residual = 0.0;
};

// Scans n and bisects sign changes of mu -> f_mu^n(c(mu)) - c(mu), where
// c(mu) is the fold point of f_mu.  Returns the first (smallest n, then
// smallest mu) critical periodic point within the bracket.
inline CriticalPeriodicPoint find_critical_periodic(const ParametricFamily& family,
                                                    std::array<double, 2> bracket, int n_max,
                                                    double tol) {
    if (!family.has_fold)
        throw solver_error("find_critical_periodic: family carries no fold point");
    if (family.at(bracket[0]).dimension != 1)
        throw solver_error("find_critical_periodic: one-dimensional families only");
    auto fold_at = [&](double mu) {
        auto ft = fold_test(family.at(mu), family.fold_point);
        if (!ft.is_fold)
            throw solver_error("find_critical_periodic: fold lost at mu=" + std::to_string(mu));
        return ft.cert.point;
    };
    auto displacement = [&](double mu, int n) {
        MapDefinition map = family.at(mu);
        Vec c = fold_at(mu);
        return phase_diff(map.space, map.iterate(c, n), c)[0];
    };
    const int grid = 128;
    std::string table;
    for (int n = 1; n <= n_max; ++n) {
        double min_abs = std::numeric_limits<double>::infinity();
        double prev_mu = bracket[0], prev_g = displacement(prev_mu, n);
        for (int i = 1; i <= grid; ++i) {
            double mu = bracket[0] + (bracket[1] - bracket[0]) * i / grid;
            double g = displacement(mu, n);
            min_abs = std::min(min_abs, std::abs(g));
            if (prev_g == 0.0 || prev_g * g < 0) {
                double lo = prev_mu, hi = mu, glo = prev_g;
                for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                    double mid = 0.5 * (lo + hi), gm = displacement(mid, n);
                    if (gm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if (glo * gm < 0)
                        hi = mid;
                    else {
                        lo = mid;
                        glo = gm;
                    }
                }
                double mu_star = 0.5 * (lo + hi);
                Vec c = fold_at(mu_star);
                MapDefinition map = family.at(mu_star);
                double res = phase_dist(map.space, map.iterate(c, n), c);
                if (res < tol) return {mu_star, n, c, res};
            }
            prev_mu = mu;
            prev_g = g;
        }
        table += " n=" + std::to_string(n) + ": min|disp|=" + std::to_string(min_abs);
    }
    throw solver_error("find_critical_periodic: no critical periodic point in bracket;" +
                       table);
}

// ---------------------------------------------------------------------------
// W(mu) tracking
// ---------------------------------------------------------------------------

struct WTrackEntry {
    double mu = 0.0;
    ExtendedInterval w;
};

struct WTrack {
    std::vector<WTrackEntry> entries;
    double modulus = 0.0;  // max adjacent endpoint distance, compactified metric
};

inline WTrack track_unstable_interval(const ParametricFamily& family,
                                      const std::vector<double>& grid) {
    WTrack track;
    for (double mu : grid) {
        MapDefinition map = family.at(mu);
        if (map.dimension != 1)
            throw solver_error("track_unstable_interval: one-dimensional families only");
        PeriodicOrbit orbit;
        try {
            orbit = find_periodic(map, family.repellor_point, 1);
        } catch (const std::exception& e) {
            throw solver_error("track_unstable_interval: repellor lost at mu=" +
                               std::to_string(mu) + " (" + e.what() + ")");
        }
        if (!is_expanding(orbit).expanding)
            throw solver_error("track_unstable_interval: repellor not expanding at mu=" +
                               std::to_string(mu));
        track.entries.push_back({mu, unstable_interval_1d(map, orbit.points[0], 80)});
    }
    for (size_t i = 1; i < track.entries.size(); ++i)
        track.modulus = std::max(track.modulus,
                                 interval_dist(track.entries[i - 1].w, track.entries[i].w));
    return track;
}

// ---------------------------------------------------------------------------
// locating the boundary parameter
// ---------------------------------------------------------------------------

namespace detail {

inline Box auto_region_1d(const MapDefinition& map, const PeriodicOrbit& repellor) {
    auto w = unstable_interval_1d(map, repellor.points[0], 80);
    double p = repellor.points[0][0];
    double lo = std::max(w.lower, p - 8.0);
    double hi = std::min(w.upper, p + 8.0);
    return Box{Vec(lo - 0.1), Vec(hi + 0.1)};
}

// does f_mu have a regular homoclinic orbit at the given search depth
inline bool regular_orbit_exists(const ParametricFamily& family, double mu, int depth) {
    MapDefinition map = family.at(mu);
    auto repellor = find_periodic(map, family.repellor_point, 1);
    Box region = auto_region_1d(map, repellor);
    auto found = search_homoclinic(map, repellor, depth, region);
    for (const auto& orb : found.orbits)
        if (orb.classification == OrbitClass::Regular) return true;
    return false;
}

}  // namespace detail

struct Mu0Result {
    double mu0 = 0.0;
    int depth = 0;
    double tol = 0.0;
    bool homoclinic_on_upper_side = false;  // orientation of the family
    bool monotone_scan = true;              // 33-point existence pre-scan
    // the located parameter is a minimum (not maximum) of the homoclinic
    // parameters, the orientation of the logistic family's tangency
    bool minimum_parameter_consistent = false;
};

// Bisection on "a regular homoclinic orbit exists at depth D".  The family
// may run from homoclinic to none in either direction; orientation is
// normalized internally and reported.
inline Mu0Result locate_mu0(const ParametricFamily& family, std::array<double, 2> bracket,
                            double tol, int depth = 8) {
    Mu0Result res;
    res.depth = depth;
    res.tol = tol;
    bool e_lo = detail::regular_orbit_exists(family, bracket[0], depth);
    bool e_hi = detail::regular_orbit_exists(family, bracket[1], depth);
    if (e_lo == e_hi)
        throw solver_error("locate_mu0: existence hypothesis fails (both ends " +
                           std::string(e_lo ? "have" : "lack") + " regular orbits)");
    res.homoclinic_on_upper_side = e_hi;

    int switches = 0;
    bool prev = e_lo;
    for (int i = 1; i <= 32; ++i) {
        double mu = bracket[0] + (bracket[1] - bracket[0]) * i / 32.0;
        bool e = detail::regular_orbit_exists(family, mu, depth);
        if (e != prev) ++switches;
        prev = e;
    }
    res.monotone_scan = switches == 1;

    double lo = bracket[0], hi = bracket[1];
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (detail::regular_orbit_exists(family, mid, depth) == e_lo)
            lo = mid;
        else
            hi = mid;
    }
    res.mu0 = 0.5 * (lo + hi);
    res.minimum_parameter_consistent = res.homoclinic_on_upper_side;
    return res;
}

// ---------------------------------------------------------------------------
// the dichotomy at mu0
// ---------------------------------------------------------------------------

enum class DichotomyCase { W_Discontinuous, CriticalHomoclinicOnly, Violation };

inline std::string dichotomy_case_name(DichotomyCase c) {
    switch (c) {
        case DichotomyCase::W_Discontinuous: return "W_Discontinuous";
        case DichotomyCase::CriticalHomoclinicOnly: return "CriticalHomoclinicOnly";
        case DichotomyCase::Violation: return "Violation";
    }
    return "?";
}

struct BifurcationReport {
    double mu0 = 0.0;
    std::vector<WTrackEntry> w_track;  // finest local grid
    DichotomyCase dichotomy = DichotomyCase::Violation;
    bool w_continuous = false;
    std::array<double, 3> moduli{0, 0, 0};  // discrete modulus per grid refinement
    int regular_count = 0;
    int critical_count = 0;
    double critical_point = 0.0;    // a point with min |det Df| on a critical orbit
    double critical_min_det = 0.0;  // that minimum
    bool has_critical_evidence = false;
};

// Evaluates both alternatives of the dichotomy at mu0: discontinuity of W
// (modulus must shrink by at least 1.5x per grid halving to count as
// continuous) and the orbit census (critical present, regular absent).
// Neither case holding is reported as a Violation, never silently patched.
inline BifurcationReport dichotomy_report(const ParametricFamily& family, double mu0,
                                          int depth = 8, double h0 = 1e-3) {
    if (family.at(mu0).dimension != 1)
        throw solver_error("dichotomy_report: the dichotomy is one-dimensional; "
                           "higher-dimensional families are out of its scope");
    BifurcationReport rep;
    rep.mu0 = mu0;
    bool e_lo = detail::regular_orbit_exists(family, mu0 - 8.0 * h0, depth);
    bool e_hi = detail::regular_orbit_exists(family, mu0 + 8.0 * h0, depth);
    if (e_lo == e_hi)
        throw solver_error("dichotomy_report: no bifurcation across mu0 (existence equal on "
                           "both sides)");

    for (int k = 0; k < 3; ++k) {
        double h = h0 / std::pow(2.0, k);
        std::vector<double> grid;
        for (int i = -8; i <= 8; ++i) grid.push_back(mu0 + i * h);
        auto track = track_unstable_interval(family, grid);
        rep.moduli[static_cast<size_t>(k)] = track.modulus;
        if (k == 2) rep.w_track = std::move(track.entries);
    }
    const double tiny = 1e-12;
    rep.w_continuous =
        (rep.moduli[2] < tiny) ||
        (rep.moduli[0] >= 1.5 * rep.moduli[1] && rep.moduli[1] >= 1.5 * rep.moduli[2]);

    MapDefinition map = family.at(mu0);
    auto repellor = find_periodic(map, family.repellor_point, 1);
    Box region = detail::auto_region_1d(map, repellor);
    auto found = search_homoclinic(map, repellor, depth, region);
    for (const auto& orb : found.orbits) {
        if (orb.classification == OrbitClass::Regular) {
            ++rep.regular_count;
        } else {
            ++rep.critical_count;
            if (!rep.has_critical_evidence || orb.min_abs_det < rep.critical_min_det) {
                rep.has_critical_evidence = true;
                rep.critical_min_det = orb.min_abs_det;
                size_t best = 0;
                std::vector<Vec> pts = orb.segment;
                pts.insert(pts.end(), orb.tail.chain.begin(), orb.tail.chain.end());
                double mn = std::numeric_limits<double>::infinity();
                for (size_t i = 0; i < pts.size(); ++i) {
                    double d = std::abs(map.jacobian(pts[i]).det());
                    if (d < mn) {
                        mn = d;
                        best = i;
                    }
                }
                rep.critical_point = pts[best][0];
            }
        }
    }

    bool case_two = rep.critical_count >= 1 && rep.regular_count == 0;
    bool case_one = !rep.w_continuous;
    rep.dichotomy = case_two ? DichotomyCase::CriticalHomoclinicOnly
                             : (case_one ? DichotomyCase::W_Discontinuous
                                         : DichotomyCase::Violation);
    return rep;
}

}  // namespace snapback
