#pragma once

// Newton kernels shared by the branch, homoclinic and bifurcation engines:
// single preimage solves, periodic-point solves, and grid-seeded preimage
// enumeration with deterministic dedup.

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "snapback/geometry.hpp"
#include "snapback/map.hpp"
#include "snapback/parallel.hpp"

namespace snapback {

struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kNewtonBudget = 50;       // quadratic convergence makes more pointless
constexpr double kResidualTol = 1e-10;  // acceptance residual for solved points
constexpr double kDedupTol = 1e-7;      // point-cloud dedup resolution

// Solve f(z) = target by Newton from `guess`.  Runs the iteration to
// stagnation and returns the final point; the caller checks the residual.
// Returns nullopt on a singular step or wandering iterates.
inline std::optional<Vec> newton_preimage(const MapDefinition& f, const Vec& target,
                                          Vec z, int max_iter = kNewtonBudget) {
    double scale = 1.0 + target.norm();
    for (int it = 0; it < max_iter; ++it) {
        Vec r = phase_diff(f.space, f(z), target);
        double rn = r.norm();
        if (rn < 1e-15 * scale) return f.canonical(z);
        Mat j = f.jacobian(z);
        Vec step;
        try {
            step = j.solve(r);
        } catch (const std::exception&) {
            return std::nullopt;  // hit the critical set
        }
        if (!step.finite()) return std::nullopt;
        // crude trust region: residual scale bounds a sane step
        double sn = step.norm();
        if (sn > 1e8) return std::nullopt;
        z = z - step;
        if (!z.finite()) return std::nullopt;
        if (sn < 1e-15 * (1.0 + z.norm())) break;
    }
    return f.canonical(z);
}

// Newton on the scalar equation det Df = 0 along the determinant gradient;
// returns the refined point (valid only near the critical set).
inline Vec polish_to_critical_set(const MapDefinition& f, Vec z) {
    auto det_at = [&](const Vec& x) { return f.jacobian(x).det(); };
    double h = f.has_analytic_jacobian() ? 1e-6 : 1e-4;
    for (int it = 0; it < 40; ++it) {
        double d = det_at(z);
        if (std::abs(d) < 1e-14) break;
        Vec g = z;
        for (int i = 0; i < f.dimension; ++i) {
            Vec xp = z, xm = z;
            xp[i] += h;
            xm[i] -= h;
            g[i] = (det_at(xp) - det_at(xm)) / (2.0 * h);
        }
        double g2 = g.dot(g);
        if (g2 < 1e-18) break;
        z = z - g * (d / g2);
    }
    return f.canonical(z);
}

// Accepted solution of f(z) = target near `guess`, or nullopt.  Tangential
// solutions (where the target grazes a critical value) stall quadratic
// Newton at the square root of machine precision; those are polished onto
// the critical set when that strictly improves the residual.
inline std::optional<Vec> solve_preimage(const MapDefinition& f, const Vec& target,
                                         const Vec& guess) {
    auto z = newton_preimage(f, target, guess);
    if (!z) return std::nullopt;
    double res = phase_dist(f.space, f(*z), target);
    if (f.jacobian(*z).smallest_singular_value() < 1e-3) {
        Vec c = polish_to_critical_set(f, *z);
        double cres = phase_dist(f.space, f(c), target);
        if (cres <= res && phase_dist(f.space, c, *z) < 1e-3) {
            z = c;
            res = cres;
        }
    }
    if (res >= kResidualTol) return std::nullopt;
    return z;
}

// Newton for f^k(x) = x.  Throws solver_error with the offending point on a
// singular Newton matrix or no convergence within the budget.
inline Vec newton_periodic(const MapDefinition& f, Vec x, int k,
                           int max_iter = kNewtonBudget) {
    for (int it = 0; it < max_iter; ++it) {
        Vec r = phase_diff(f.space, f.iterate(x, k), x);
        if (r.norm() < 1e-14 * (1.0 + x.norm())) return f.canonical(x);
        Mat a = f.jacobian_power(x, k) + Mat::identity(f.dimension) * -1.0;
        Vec step;
        try {
            step = a.solve(r);
        } catch (const std::exception&) {
            throw solver_error("singular Newton matrix for f^" + std::to_string(k) +
                               " - id at " + x.str());
        }
        x = x - step;
        if (!x.finite())
            throw solver_error("periodic-point Newton diverged (k=" + std::to_string(k) + ")");
        if (step.norm() < 1e-15 * (1.0 + x.norm())) break;
    }
    Vec r = phase_diff(f.space, f.iterate(x, k), x);
    if (r.norm() >= kResidualTol)
        throw solver_error("no convergence for periodic point (k=" + std::to_string(k) +
                           "), residual " + std::to_string(r.norm()) + " at " + x.str());
    return f.canonical(x);
}

// deterministic dedup: sorts lexicographically, clusters within tol
inline std::vector<Vec> dedup_points(std::vector<Vec> pts, PhaseSpace space,
                                     double tol = kDedupTol) {
    std::sort(pts.begin(), pts.end(), lex_less);
    std::vector<Vec> out;
    for (const auto& p : pts) {
        bool dup = false;
        for (auto it = out.rbegin(); it != out.rend(); ++it) {
            if (std::abs((*it)[0] - p[0]) > tol && space != PhaseSpace::circle) break;
            if (phase_dist(space, *it, p) < tol) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(p);
    }
    return out;
}

// All solutions of f(z) = target found from a seed grid over `domain`
// (seeds_per_dim per dimension), filtered by `keep`, deduped at kDedupTol.
inline std::vector<Vec> preimages_in_box(
    const MapDefinition& f, const Vec& target, const Box& domain, int seeds_per_dim = 64,
    const std::function<bool(const Vec&)>& keep = nullptr) {
    long total = f.dimension == 1 ? seeds_per_dim : static_cast<long>(seeds_per_dim) * seeds_per_dim;
    std::vector<std::optional<Vec>> found(static_cast<size_t>(total));
    parallel_for(total, [&](long idx) {
        Vec seed = target;
        if (f.dimension == 1) {
            double t = (static_cast<double>(idx) + 0.5) / seeds_per_dim;
            seed = Vec(domain.lo[0] + t * (domain.hi[0] - domain.lo[0]));
        } else {
            long i = idx % seeds_per_dim, j = idx / seeds_per_dim;
            double tx = (static_cast<double>(i) + 0.5) / seeds_per_dim;
            double ty = (static_cast<double>(j) + 0.5) / seeds_per_dim;
            seed = Vec(domain.lo[0] + tx * (domain.hi[0] - domain.lo[0]),
                       domain.lo[1] + ty * (domain.hi[1] - domain.lo[1]));
        }
        auto z = solve_preimage(f, target, seed);
        if (z && domain.contains(*z, 1e-9) && (!keep || keep(*z))) found[static_cast<size_t>(idx)] = *z;
    });
    std::vector<Vec> pts;
    for (const auto& z : found)
        if (z) pts.push_back(*z);
    return dedup_points(std::move(pts), f.space);
}

}  // namespace snapback
