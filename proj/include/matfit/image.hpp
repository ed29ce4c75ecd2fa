// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_IMAGE_HPP
#define MATFIT_IMAGE_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "matfit/common.hpp"

namespace matfit {

// Linear-radiance RGB raster. Storage is float (PFM precision); math that
// needs doubles converts at the point of use.
struct ImageRGB {
    int width = 0, height = 0;
    std::vector<float> data; // 3 floats per pixel, row-major, row 0 on top

    ImageRGB() = default;
    ImageRGB(int w, int h) : width(w), height(h), data(size_t(w) * h * 3, 0.0f) {}

    size_t idx(int x, int y) const { return (size_t(y) * width + x) * 3; }

    RGB at(int x, int y) const {
        size_t i = idx(x, y);
        return RGB(data[i], data[i + 1], data[i + 2]);
    }
    void set(int x, int y, const RGB& c) {
        size_t i = idx(x, y);
        data[i] = float(c.r);
        data[i + 1] = float(c.g);
        data[i + 2] = float(c.b);
    }

    bool same_shape(const ImageRGB& o) const { return width == o.width && height == o.height; }

    bool all_finite() const {
        for (float v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// Object silhouette mask.
struct Mask {
    int width = 0, height = 0;
    std::vector<uint8_t> on; // 1 inside the object, 0 outside

    Mask() = default;
    Mask(int w, int h) : width(w), height(h), on(size_t(w) * h, 0) {}

    bool get(int x, int y) const { return on[size_t(y) * width + x] != 0; }
    void set(int x, int y, bool v) { on[size_t(y) * width + x] = v ? 1 : 0; }

    bool inside(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height && get(x, y);
    }

    int count() const {
        int c = 0;
        for (uint8_t v : on) c += v;
        return c;
    }

    // 4-neighbourhood boundary: masked pixels with at least one unmasked
    // (or out-of-image) neighbour.
    bool is_boundary(int x, int y) const {
        if (!get(x, y)) return false;
        return !inside(x - 1, y) || !inside(x + 1, y) || !inside(x, y - 1) || !inside(x, y + 1);
    }

    int connected_components() const {
        std::vector<uint8_t> seen(on.size(), 0);
        int comps = 0;
        std::vector<int> stack;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                size_t i = size_t(y) * width + x;
                if (!on[i] || seen[i]) continue;
                ++comps;
                stack.push_back(int(i));
                seen[i] = 1;
                while (!stack.empty()) {
                    int p = stack.back();
                    stack.pop_back();
                    int px = p % width, py = p / width;
                    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                    for (int d = 0; d < 4; ++d) {
                        int nx = px + dx[d], ny = py + dy[d];
                        if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
                        size_t ni = size_t(ny) * width + nx;
                        if (on[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            stack.push_back(int(ni));
                        }
                    }
                }
            }
        return comps;
    }

    static Mask disk(int size, double radius_frac = 0.42) {
        Mask m(size, size);
        double c = (size - 1) / 2.0, r = radius_frac * size;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                m.set(x, y, sqr(x - c) + sqr(y - c) <= r * r);
        return m;
    }

    static Mask ellipse(int size, double rx_frac, double ry_frac) {
        Mask m(size, size);
        double c = (size - 1) / 2.0;
        double rx = rx_frac * size, ry = ry_frac * size;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                m.set(x, y, sqr((x - c) / rx) + sqr((y - c) / ry) <= 1.0);
        return m;
    }
};

// Indexed view of the masked pixels (dense iteration order for solvers).
struct MaskIndex {
    int width = 0, height = 0;
    std::vector<int> pixels;        // linear pixel ids, row-major scan order
    std::vector<int> dense_of_pix;  // pixel id -> dense index, -1 outside

    explicit MaskIndex(const Mask& m) : width(m.width), height(m.height) {
        dense_of_pix.assign(size_t(m.width) * m.height, -1);
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.get(x, y)) {
                    dense_of_pix[size_t(y) * m.width + x] = int(pixels.size());
                    pixels.push_back(y * m.width + x);
                }
    }

    int count() const { return int(pixels.size()); }
    int x_of(int dense) const { return pixels[dense] % width; }
    int y_of(int dense) const { return pixels[dense] / width; }
    int dense_at(int x, int y) const {
        if (x < 0 || x >= width || y < 0 || y >= height) return -1;
        return dense_of_pix[size_t(y) * width + x];
    }
};

} // namespace matfit

#endif
