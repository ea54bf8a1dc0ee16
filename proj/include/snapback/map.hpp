#pragma once

// Map abstraction: smooth endomorphisms of the line, the plane, or the
// circle, with analytic or central-finite-difference Jacobians, plus the
// built-in maps and parametric families used throughout the toolkit.

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snapback/geometry.hpp"

namespace snapback {

enum class PhaseSpace { real_line, plane, circle };

inline std::string phase_space_name(PhaseSpace s) {
    switch (s) {
        case PhaseSpace::real_line: return "real-line";
        case PhaseSpace::plane: return "plane";
        case PhaseSpace::circle: return "circle";
    }
    return "?";
}

// angle reduced to [0, 2*pi)
inline double wrap_angle(double t) {
    double r = std::fmod(t, kTwoPi);
    if (r < 0) r += kTwoPi;
    return r;
}
// signed angle difference in [-pi, pi)
inline double wrap_signed(double t) {
    double r = std::fmod(t, kTwoPi);
    if (r < -0.5 * kTwoPi) r += kTwoPi;
    if (r >= 0.5 * kTwoPi) r -= kTwoPi;
    return r;
}

// a - b respecting the phase space topology
inline Vec phase_diff(PhaseSpace s, const Vec& a, const Vec& b) {
    Vec d = a - b;
    if (s == PhaseSpace::circle) d[0] = wrap_signed(d[0]);
    return d;
}
inline double phase_dist(PhaseSpace s, const Vec& a, const Vec& b) {
    return phase_diff(s, a, b).norm();
}

struct map_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Immutable after construction; safe to evaluate concurrently.
struct MapDefinition {
    std::string name;
    int dimension = 1;
    PhaseSpace space = PhaseSpace::real_line;
    std::function<Vec(const Vec&)> eval_fn;
    std::function<Mat(const Vec&)> jac_fn;  // empty => central differences
    double fd_step = 1e-6;

    Vec canonical(Vec x) const {
        if (space == PhaseSpace::circle) x[0] = wrap_angle(x[0]);
        return x;
    }

    Vec operator()(const Vec& x) const {
        Vec y = eval_fn(canonical(x));
        return canonical(y);
    }

    Vec iterate(Vec x, int n) const {
        for (int i = 0; i < n; ++i) x = (*this)(x);
        return x;
    }

    bool has_analytic_jacobian() const { return static_cast<bool>(jac_fn); }

    Mat jacobian(const Vec& x) const {
        Vec xc = canonical(x);
        if (jac_fn) {
            Mat j = jac_fn(xc);
            if (!j.finite()) throw map_error("non-finite Jacobian of " + name + " at " + xc.str());
            return j;
        }
        return fd_jacobian(xc);
    }

    Mat fd_jacobian(const Vec& x, double h = 0.0) const {
        if (h <= 0) h = fd_step;
        Mat j;
        j.dim = dimension;
        for (int c = 0; c < dimension; ++c) {
            Vec xp = x, xm = x;
            xp[c] += h;
            xm[c] -= h;
            Vec fp = eval_fn(xp), fm = eval_fn(xm);
            Vec d = fp - fm;
            if (space == PhaseSpace::circle) d[0] = wrap_signed(d[0]);
            for (int r = 0; r < dimension; ++r) j.at(r, c) = d[r] / (2.0 * h);
        }
        if (!j.finite()) throw map_error("non-finite FD Jacobian of " + name + " at " + x.str());
        return j;
    }

    // Jacobian of f^n along the forward orbit of x.
    Mat jacobian_power(Vec x, int n) const {
        Mat j = Mat::identity(dimension);
        for (int i = 0; i < n; ++i) {
            j = jacobian(x) * j;
            x = (*this)(x);
        }
        return j;
    }
};

// ---------------------------------------------------------------------------
// built-in maps
// ---------------------------------------------------------------------------

inline MapDefinition make_logistic(double mu) {
    MapDefinition m;
    m.name = "logistic";
    m.dimension = 1;
    m.space = PhaseSpace::real_line;
    m.eval_fn = [mu](const Vec& x) { return Vec(4.0 * mu * x[0] * (1.0 - x[0])); };
    m.jac_fn = [mu](const Vec& x) {
        Mat j;
        j.dim = 1;
        j.m[0] = 4.0 * mu * (1.0 - 2.0 * x[0]);
        return j;
    };
    return m;
}

inline MapDefinition make_doubling() {
    MapDefinition m;
    m.name = "doubling";
    m.dimension = 1;
    m.space = PhaseSpace::circle;
    m.eval_fn = [](const Vec& t) { return Vec(wrap_angle(2.0 * t[0])); };
    m.jac_fn = [](const Vec&) {
        Mat j;
        j.dim = 1;
        j.m[0] = 2.0;
        return j;
    };
    return m;
}

// Whitney normal form (a_1, .., a_d) -> (a_1, .., a_{d-1}, a_d^2)
inline MapDefinition make_fold_normal(int d) {
    if (d != 1 && d != 2) throw map_error("fold_normal: dimension must be 1 or 2");
    MapDefinition m;
    m.name = "fold_normal";
    m.dimension = d;
    m.space = d == 1 ? PhaseSpace::real_line : PhaseSpace::plane;
    m.eval_fn = [d](const Vec& x) {
        if (d == 1) return Vec(x[0] * x[0]);
        return Vec(x[0], x[1] * x[1]);
    };
    m.jac_fn = [d](const Vec& x) {
        Mat j = Mat::identity(d);
        j.at(d - 1, d - 1) = 2.0 * x[d - 1];
        if (d == 2) j.at(0, 0) = 1.0;
        return j;
    };
    return m;
}

// ---------------------------------------------------------------------------
// parametric families
// ---------------------------------------------------------------------------

struct ParametricFamily {
    std::string name;
    std::array<double, 2> parameter_range{0.0, 1.0};
    std::function<MapDefinition(double)> at;
    double continuity_step = 1e-3;
    // standing assumption of the bifurcation engine: the repellor fixed
    // point is the same point for every parameter
    Vec repellor_point;
    Vec fold_point;
    bool has_fold = false;
};

inline ParametricFamily make_logistic_family() {
    ParametricFamily f;
    f.name = "logistic";
    f.parameter_range = {0.05, 1.5};
    f.at = [](double mu) { return make_logistic(mu); };
    f.repellor_point = Vec(0.0);
    f.fold_point = Vec(0.5);
    f.has_fold = true;
    return f;
}

// ---------------------------------------------------------------------------
// bump deformations
// ---------------------------------------------------------------------------

// C^2 polynomial plateau: 1 on [0, r1], 0 on [r2, inf), quintic blend between.
inline double plateau(double t, double r1, double r2) {
    if (t <= r1) return 1.0;
    if (t >= r2) return 0.0;
    double s = (t - r1) / (r2 - r1);
    double s3 = s * s * s;
    return 1.0 - (6.0 * s * s - 15.0 * s + 10.0) * s3;
}
inline double plateau_deriv(double t, double r1, double r2) {
    if (t <= r1 || t >= r2) return 0.0;
    double s = (t - r1) / (r2 - r1);
    double s2 = s * s;
    return -(30.0 * s2 * s2 - 60.0 * s2 * s + 30.0 * s2) / (r2 - r1);
}

struct BumpDeformation {
    Vec center;
    double inner_radius = 0.0;
    double outer_radius = 0.0;
    Vec direction;       // unit vector e_d
    double amplitude = 0.0;  // mu
    // optional protected repellor neighborhood; deformations reaching it
    // are rejected (they would move the fixed point)
    bool has_protected_ball = false;
    Vec protected_center;
    double protected_radius = 0.0;
};

inline MapDefinition deform(const MapDefinition& base, const BumpDeformation& spec) {
    if (!(spec.inner_radius < spec.outer_radius) || spec.inner_radius <= 0)
        throw map_error("deform: need 0 < inner_radius < outer_radius");
    if (spec.has_protected_ball) {
        double gap = phase_dist(base.space, spec.center, spec.protected_center);
        if (gap < spec.outer_radius + spec.protected_radius)
            throw map_error("deform: bump support overlaps the protected repellor neighborhood");
    }
    MapDefinition m = base;
    m.name = base.name + "+bump";
    PhaseSpace space = base.space;
    Vec center = spec.center;
    Vec dir = spec.direction.unit();
    double r1 = spec.inner_radius, r2 = spec.outer_radius, amp = spec.amplitude;
    auto base_eval = base.eval_fn;
    m.eval_fn = [=](const Vec& x) {
        double t = phase_dist(space, x, center);
        Vec y = base_eval(x);
        return y + dir * (amp * plateau(t, r1, r2));
    };
    if (base.jac_fn) {
        auto base_jac = base.jac_fn;
        m.jac_fn = [=](const Vec& x) {
            Mat j = base_jac(x);
            Vec d = phase_diff(space, x, center);
            double t = d.norm();
            if (t > 0 && t > r1 && t < r2) {
                double dp = amp * plateau_deriv(t, r1, r2) / t;
                for (int r = 0; r < j.dim; ++r)
                    for (int c = 0; c < j.dim; ++c) j.at(r, c) += dir[r] * dp * d[c];
            }
            return j;
        };
    }
    return m;
}

}  // namespace snapback
