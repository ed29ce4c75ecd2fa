// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_COMMON_HPP
#define MATFIT_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace matfit {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kInvPi = 1.0 / kPi;

inline double sqr(double x) { return x * x; }

inline double pow5(double x) {
    double x2 = x * x;
    return x2 * x2 * x;
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// 3-vectors and RGB triples

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalize(const Vec3& v) {
    double len = length(v);
    return len > 0 ? v / len : Vec3{0, 0, 0};
}

inline Vec3 reflect(const Vec3& w, const Vec3& n) { return 2.0 * dot(w, n) * n - w; }

struct RGB {
    double r = 0, g = 0, b = 0;

    RGB() = default;
    explicit RGB(double v) : r(v), g(v), b(v) {}
    RGB(double r_, double g_, double b_) : r(r_), g(g_), b(b_) {}

    RGB operator+(const RGB& o) const { return {r + o.r, g + o.g, b + o.b}; }
    RGB operator-(const RGB& o) const { return {r - o.r, g - o.g, b - o.b}; }
    RGB operator*(double s) const { return {r * s, g * s, b * s}; }
    RGB operator*(const RGB& o) const { return {r * o.r, g * o.g, b * o.b}; }
    RGB operator/(double s) const { return {r / s, g / s, b / s}; }
    RGB& operator+=(const RGB& o) { r += o.r; g += o.g; b += o.b; return *this; }
    RGB& operator*=(double s) { r *= s; g *= s; b *= s; return *this; }

    double operator[](int i) const { return i == 0 ? r : (i == 1 ? g : b); }
    double& operator[](int i) { return i == 0 ? r : (i == 1 ? g : b); }

    double max_component() const { return std::max(r, std::max(g, b)); }
    double mean() const { return (r + g + b) / 3.0; }
    bool is_finite() const { return std::isfinite(r) && std::isfinite(g) && std::isfinite(b); }
};

inline RGB operator*(double s, const RGB& c) { return c * s; }

// ---------------------------------------------------------------------------
// Smooth devices used by the energy terms.

// sqrt(x^2 + eps); satisfies |x| <= smooth_abs(x) <= |x| + sqrt(eps).
inline double smooth_abs(double x, double eps) { return std::sqrt(x * x + eps); }

inline double smooth_abs_grad(double x, double eps) { return x / std::sqrt(x * x + eps); }

// Shifted smooth vector norm: sqrt(|v|^2 + eps) - sqrt(eps). Zero at v = 0,
// approaches |v| for large |v|, differentiable everywhere.
inline double smooth_norm(double sq_norm, double eps) {
    return std::sqrt(sq_norm + eps) - std::sqrt(eps);
}

// d smooth_norm / d sq_norm
inline double smooth_norm_grad_sq(double sq_norm, double eps) {
    return 0.5 / std::sqrt(sq_norm + eps);
}

// softmin S(x) = -(1/t) ln sum exp(-t x_i); satisfies
// min(x) - ln(n)/t <= S(x) <= min(x).
inline double softmin(const std::vector<double>& xs, double t) {
    double lo = *std::min_element(xs.begin(), xs.end());
    double acc = 0;
    for (double x : xs) acc += std::exp(-t * (x - lo));
    return lo - std::log(acc) / t;
}

// weights d softmin / d x_i (softmax of -t x)
inline std::vector<double> softmin_grad(const std::vector<double>& xs, double t) {
    double lo = *std::min_element(xs.begin(), xs.end());
    std::vector<double> w(xs.size());
    double acc = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        w[i] = std::exp(-t * (xs[i] - lo));
        acc += w[i];
    }
    for (double& wi : w) wi /= acc;
    return w;
}

// ---------------------------------------------------------------------------
// Deterministic RNG. splitmix64 seeding + xoshiro-style stream; identical
// across platforms, cheap enough to reseed per pixel.

struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed = 0) : state(seed + 0x9E3779B97F4A7C15ull) {}

    uint64_t next_u64() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    uint32_t next_u32(uint32_t bound) { return uint32_t(next_u64() % bound); }

    double normal() {
        // Box-Muller; consumes two uniforms.
        double u1 = std::max(uniform(), 1e-300);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }
};

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    a ^= b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2);
    return a;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration on
// Legendre polynomials. Deterministic, accurate to ~1e-15.

inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = 0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

} // namespace matfit

#endif
