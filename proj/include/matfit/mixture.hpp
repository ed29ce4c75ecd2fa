// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_MIXTURE_HPP
#define MATFIT_MIXTURE_HPP

#include <vector>

#include "matfit/image.hpp"

namespace matfit {

// Per-pixel simplex weights over k materials.
struct MixtureField {
    int width = 0, height = 0, k = 1;
    Mask mask;
    std::vector<double> w; // pixel-major, k entries per pixel

    MixtureField() = default;
    MixtureField(const Mask& m, int k_)
        : width(m.width), height(m.height), k(k_), mask(m),
          w(size_t(m.width) * m.height * k_, 0.0) {}

    size_t idx(int x, int y, int j) const { return (size_t(y) * width + x) * k + j; }
    double at(int x, int y, int j) const { return w[idx(x, y, j)]; }
    void set(int x, int y, int j, double v) { w[idx(x, y, j)] = v; }

    static MixtureField constant(const Mask& m, int k) {
        MixtureField f(m, k);
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.get(x, y))
                    for (int j = 0; j < k; ++j) f.set(x, y, j, 1.0 / k);
        return f;
    }

    // unity + non-negativity on every masked pixel
    bool valid_simplex(double tol = 1e-9) const {
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                if (!mask.get(x, y)) continue;
                double sum = 0;
                for (int j = 0; j < k; ++j) {
                    double v = at(x, y, j);
                    if (!(v >= -tol) || !std::isfinite(v)) return false;
                    sum += v;
                }
                if (std::abs(sum - 1.0) > tol) return false;
            }
        return true;
    }
};

} // namespace matfit

#endif
