// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_SH_HPP
#define MATFIT_SH_HPP

#include <array>

#include "matfit/common.hpp"

namespace matfit {

// Real spherical harmonics through l = 2, standard real convention.
// Index order: (0,0), (1,-1), (1,0), (1,1), (2,-2), (2,-1), (2,0), (2,1), (2,2).
inline constexpr int kShCount = 9;

namespace shc {
inline constexpr double c0 = 0.28209479177387814; // 0.5 sqrt(1/pi)
inline constexpr double c1 = 0.4886025119029199;  // sqrt(3/(4 pi))
inline constexpr double c2 = 1.0925484305920792;  // 0.5 sqrt(15/pi)
inline constexpr double c3 = 0.31539156525252005; // 0.25 sqrt(5/pi)
inline constexpr double c4 = 0.5462742152960396;  // 0.25 sqrt(15/pi)
} // namespace shc

inline std::array<double, kShCount> sh_basis(const Vec3& d) {
    using namespace shc;
    return {c0,
            c1 * d.y,
            c1 * d.z,
            c1 * d.x,
            c2 * d.x * d.y,
            c2 * d.y * d.z,
            c3 * (3.0 * d.z * d.z - 1.0),
            c2 * d.x * d.z,
            c4 * (d.x * d.x - d.y * d.y)};
}

// Gradients of the polynomial forms w.r.t. the direction components.
inline std::array<Vec3, kShCount> sh_basis_grad(const Vec3& d) {
    using namespace shc;
    return {Vec3{0, 0, 0},
            Vec3{0, c1, 0},
            Vec3{0, 0, c1},
            Vec3{c1, 0, 0},
            Vec3{c2 * d.y, c2 * d.x, 0},
            Vec3{0, c2 * d.z, c2 * d.y},
            Vec3{0, 0, 6.0 * c3 * d.z},
            Vec3{c2 * d.z, 0, c2 * d.x},
            Vec3{2.0 * c4 * d.x, -2.0 * c4 * d.y, 0}};
}

// Clamped-cosine convolution factors per band (l = 0, 1, 2).
inline constexpr std::array<double, kShCount> kIrradianceA = {
    kPi,
    2.0 * kPi / 3.0, 2.0 * kPi / 3.0, 2.0 * kPi / 3.0,
    kPi / 4.0, kPi / 4.0, kPi / 4.0, kPi / 4.0, kPi / 4.0};

// 9x3 coefficient matrix (rows = basis functions, columns = R,G,B).
struct SHCoeffs {
    std::array<RGB, kShCount> c{};

    static SHCoeffs zero() { return SHCoeffs{}; }

    // band-limited radiance reconstruction
    RGB eval(const Vec3& d) const {
        auto y = sh_basis(d);
        RGB out;
        for (int i = 0; i < kShCount; ++i) out += c[i] * y[i];
        return out;
    }

    // irradiance at normal n: sum_i A_l(i) * c_i * Y_i(n). Exact for
    // band-limited radiance.
    RGB irradiance(const Vec3& n) const {
        auto y = sh_basis(n);
        RGB out;
        for (int i = 0; i < kShCount; ++i) out += c[i] * (kIrradianceA[i] * y[i]);
        return out;
    }

    SHCoeffs operator*(double s) const {
        SHCoeffs out;
        for (int i = 0; i < kShCount; ++i) out.c[i] = c[i] * s;
        return out;
    }
    SHCoeffs operator+(const SHCoeffs& o) const {
        SHCoeffs out;
        for (int i = 0; i < kShCount; ++i) out.c[i] = c[i] + o.c[i];
        return out;
    }

    bool all_finite() const {
        for (const RGB& v : c)
            if (!v.is_finite()) return false;
        return true;
    }
};

} // namespace matfit

#endif
