#pragma once

// Small fixed-capacity vector/matrix arithmetic for phase spaces of
// dimension one or two.  Everything is closed-form; no allocations.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace snapback {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Vec {
    std::array<double, 2> a{0.0, 0.0};
    int dim = 1;

    Vec() = default;
    explicit Vec(double x) : a{x, 0.0}, dim(1) {}
    Vec(double x, double y) : a{x, y}, dim(2) {}

    double& operator[](int i) { return a[static_cast<size_t>(i)]; }
    double operator[](int i) const { return a[static_cast<size_t>(i)]; }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.a[i] += o.a[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.a[i] -= o.a[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r.a[i] *= s;
        return r;
    }
    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < dim; ++i) a[i] += o.a[i];
        return *this;
    }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += a[i] * o.a[i];
        return s;
    }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const {
        for (int i = 0; i < dim; ++i)
            if (!std::isfinite(a[i])) return false;
        return true;
    }
    Vec unit() const {
        double n = norm();
        return n > 0 ? *this * (1.0 / n) : *this;
    }

    std::string str() const {
        if (dim == 1) return "(" + std::to_string(a[0]) + ")";
        return "(" + std::to_string(a[0]) + ", " + std::to_string(a[1]) + ")";
    }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

// Lexicographic order, used for deterministic merges of point sets.
inline bool lex_less(const Vec& u, const Vec& v) {
    for (int i = 0; i < u.dim; ++i) {
        if (u[i] < v[i]) return true;
        if (u[i] > v[i]) return false;
    }
    return false;
}

struct Mat {
    // row-major d x d, d in {1, 2}
    std::array<double, 4> m{0, 0, 0, 0};
    int dim = 1;

    static Mat identity(int d) {
        Mat r;
        r.dim = d;
        r.m = {1, 0, 0, 1};
        if (d == 1) r.m[3] = 0;
        return r;
    }

    double& at(int i, int j) { return m[static_cast<size_t>(i * 2 + j)]; }
    double at(int i, int j) const { return m[static_cast<size_t>(i * 2 + j)]; }

    Mat operator*(const Mat& o) const {
        Mat r;
        r.dim = dim;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                double s = 0;
                for (int k = 0; k < dim; ++k) s += at(i, k) * o.at(k, j);
                r.at(i, j) = s;
            }
        return r;
    }
    Vec operator*(const Vec& v) const {
        Vec r = v;
        for (int i = 0; i < dim; ++i) {
            double s = 0;
            for (int k = 0; k < dim; ++k) s += at(i, k) * v[k];
            r[i] = s;
        }
        return r;
    }
    Mat operator+(const Mat& o) const {
        Mat r = *this;
        for (int i = 0; i < 4; ++i) r.m[i] += o.m[i];
        return r;
    }
    Mat operator*(double s) const {
        Mat r = *this;
        for (int i = 0; i < 4; ++i) r.m[i] *= s;
        return r;
    }

    double det() const {
        if (dim == 1) return m[0];
        return m[0] * m[3] - m[1] * m[2];
    }

    bool finite() const {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (!std::isfinite(at(i, j))) return false;
        return true;
    }

    // Solves A x = b; throws on a numerically singular matrix.
    Vec solve(const Vec& b) const {
        double d = det();
        double scale = frobenius();
        if (std::abs(d) <= 1e-300 || std::abs(d) < 1e-15 * scale * scale + 1e-300) {
            if (dim == 1 && std::abs(m[0]) > 1e-300) {
                // 1x1 scale heuristic misfires when |m| is tiny but honest
                if (std::abs(m[0]) >= 1e-13 * (1.0 + std::abs(b[0])))
                    return Vec(b[0] / m[0]);
            }
            throw std::runtime_error("singular matrix in solve, det=" + std::to_string(d));
        }
        if (dim == 1) return Vec(b[0] / m[0]);
        Vec r(0.0, 0.0);
        r[0] = (m[3] * b[0] - m[1] * b[1]) / d;
        r[1] = (m[0] * b[1] - m[2] * b[0]) / d;
        return r;
    }

    double frobenius() const {
        double s = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += at(i, j) * at(i, j);
        return std::sqrt(s);
    }

    // Closed-form singular values.  sigma_min computed as |det|/sigma_max
    // to avoid cancellation.
    double largest_singular_value() const {
        if (dim == 1) return std::abs(m[0]);
        double t = m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3];
        double d = det();
        double disc = t * t - 4.0 * d * d;
        if (disc < 0) disc = 0;
        return std::sqrt(0.5 * (t + std::sqrt(disc)));
    }
    double smallest_singular_value() const {
        if (dim == 1) return std::abs(m[0]);
        double smax = largest_singular_value();
        if (smax == 0) return 0;
        return std::abs(det()) / smax;
    }

    // Unit right null vector of a rank-deficient 2x2 (or sign for 1x1).
    Vec kernel_direction() const {
        if (dim == 1) return Vec(1.0);
        // use the larger row of [A; A] adjugate structure: A v = 0
        Vec r0(m[0], m[1]), r1(m[2], m[3]);
        Vec v = r0.norm() >= r1.norm() ? Vec(-r0[1], r0[0]) : Vec(-r1[1], r1[0]);
        if (v.norm() == 0) return Vec(1.0, 0.0);
        return v.unit();
    }
    // Unit vector orthogonal to the column span of a rank-deficient 2x2.
    Vec left_null_direction() const {
        if (dim == 1) return Vec(1.0);
        Vec c0(m[0], m[2]), c1(m[1], m[3]);
        Vec c = c0.norm() >= c1.norm() ? c0 : c1;
        if (c.norm() == 0) return Vec(0.0, 1.0);
        Vec n(-c[1], c[0]);
        return n.unit();
    }
};

// Axis-aligned box; the search region primitive.
struct Box {
    Vec lo, hi;

    bool contains(const Vec& x, double slack = 0.0) const {
        for (int i = 0; i < x.dim; ++i)
            if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
        return true;
    }
    Vec clamp(const Vec& x) const {
        Vec r = x;
        for (int i = 0; i < x.dim; ++i) r[i] = std::min(std::max(r[i], lo[i]), hi[i]);
        return r;
    }
    static Box hull(const Box& a, const Box& b) {
        Box r = a;
        for (int i = 0; i < a.lo.dim; ++i) {
            r.lo[i] = std::min(a.lo[i], b.lo[i]);
            r.hi[i] = std::max(a.hi[i], b.hi[i]);
        }
        return r;
    }
    Box inflated(double f) const {
        Box r = *this;
        for (int i = 0; i < lo.dim; ++i) {
            double c = 0.5 * (lo[i] + hi[i]), h = 0.5 * (hi[i] - lo[i]);
            r.lo[i] = c - h * (1 + f) - 1e-12;
            r.hi[i] = c + h * (1 + f) + 1e-12;
        }
        return r;
    }
};

// Deterministic quasi-random sequences (Kronecker / plastic-number lattices).
inline double quasi_uniform_1d(long i) {
    double x = 0.6180339887498949 * static_cast<double>(i + 1);
    return x - std::floor(x);
}
inline Vec quasi_uniform_2d(long i) {
    double x = 0.7548776662466927 * static_cast<double>(i + 1);
    double y = 0.5698402909980532 * static_cast<double>(i + 1);
    return Vec(x - std::floor(x), y - std::floor(y));
}

// Portable deterministic uniform doubles from a splitmix64 stream.
struct SeededRng {
    unsigned long long state;
    explicit SeededRng(unsigned long long seed) : state(seed) {}
    unsigned long long next_u64() {
        state += 0x9E3779B97f4A7C15ULL;
        unsigned long long z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }
};

}  // namespace snapback
