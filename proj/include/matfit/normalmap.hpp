// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_NORMALMAP_HPP
#define MATFIT_NORMALMAP_HPP

#include <vector>

#include "matfit/common.hpp"
#include "matfit/image.hpp"

namespace matfit {

// Per-pixel unit normals over a mask, stored as azimuth/elevation so every
// reconstructed normal has unit norm by construction.
// n = (cos el cos az, cos el sin az, sin el); el in [0, pi/2] keeps the
// surface camera-facing (view direction -z, surface-to-camera +z).
struct NormalMap {
    int width = 0, height = 0;
    Mask mask;
    std::vector<double> az, el;

    NormalMap() = default;
    explicit NormalMap(const Mask& m)
        : width(m.width), height(m.height), mask(m),
          az(size_t(m.width) * m.height, 0.0), el(size_t(m.width) * m.height, 0.0) {}

    size_t idx(int x, int y) const { return size_t(y) * width + x; }

    Vec3 normal(int x, int y) const {
        size_t i = idx(x, y);
        return dir_from_azel(az[i], el[i]);
    }

    void set_normal(int x, int y, const Vec3& n) {
        size_t i = idx(x, y);
        Vec3 u = normalize(n);
        el[i] = std::asin(std::clamp(u.z, -1.0, 1.0));
        az[i] = std::atan2(u.y, u.x);
    }

    // d n / d az and d n / d el at a pixel
    static void normal_jacobian(double az, double el, Vec3& dn_daz, Vec3& dn_del) {
        double ca = std::cos(az), sa = std::sin(az);
        double ce = std::cos(el), se = std::sin(el);
        dn_daz = {-ce * sa, ce * ca, 0};
        dn_del = {-se * ca, -se * sa, ce};
    }

    bool finite_on_mask() const {
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                if (mask.get(x, y)) {
                    size_t i = idx(x, y);
                    if (!std::isfinite(az[i]) || !std::isfinite(el[i])) return false;
                }
        return true;
    }
};

// Normals of a height field z(x, y) by forward differences (backward at the
// mask edge), n proportional to (-dz/dx, -dz/dy, 1). Image y grows downward;
// the height gradient uses image coordinates directly.
inline NormalMap normals_from_height(const Mask& mask, const std::vector<double>& z) {
    NormalMap nm(mask);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.get(x, y)) continue;
            size_t i = size_t(y) * mask.width + x;
            double zx, zy;
            if (mask.inside(x + 1, y))
                zx = z[i + 1] - z[i];
            else if (mask.inside(x - 1, y))
                zx = z[i] - z[i - 1];
            else
                zx = 0;
            if (mask.inside(x, y + 1))
                zy = z[i + mask.width] - z[i];
            else if (mask.inside(x, y - 1))
                zy = z[i] - z[i - mask.width];
            else
                zy = 0;
            nm.set_normal(x, y, Vec3{-zx, -zy, 1.0});
        }
    return nm;
}

// Analytic hemisphere normals on a disk mask (unit sphere of the given
// pixel radius centered at (cx, cy)); pixels outside the disk get +z.
inline NormalMap hemisphere_normals(const Mask& mask, double cx, double cy, double radius) {
    NormalMap nm(mask);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.get(x, y)) continue;
            double dx = (x - cx) / radius, dy = (y - cy) / radius;
            double r2 = dx * dx + dy * dy;
            if (r2 >= 1.0) {
                double r = std::sqrt(r2);
                nm.set_normal(x, y, Vec3{dx / r, dy / r, 0.0});
            } else {
                nm.set_normal(x, y, Vec3{dx, dy, std::sqrt(1.0 - r2)});
            }
        }
    return nm;
}

} // namespace matfit

#endif
