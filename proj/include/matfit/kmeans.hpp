// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_KMEANS_HPP
#define MATFIT_KMEANS_HPP

#include <vector>

#include "matfit/common.hpp"

namespace matfit {

// Lloyd's algorithm with farthest-point initialization and restarts.
// Deterministic given the seed. Points are row-major (n x dim).
struct KMeansResult {
    std::vector<double> centers; // k x dim
    std::vector<int> assign;     // n
    double sse = 0;
};

inline KMeansResult kmeans(const std::vector<double>& points, int n, int dim, int k,
                           uint64_t seed, int restarts = 8, int iters = 100) {
    if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");
    KMeansResult best;
    best.sse = std::numeric_limits<double>::infinity();

    auto dist2 = [&](const double* a, const double* b) {
        double acc = 0;
        for (int d = 0; d < dim; ++d) acc += sqr(a[d] - b[d]);
        return acc;
    };

    for (int r = 0; r < restarts; ++r) {
        Rng rng(hash_combine(seed, uint64_t(r)));
        std::vector<double> centers(size_t(k) * dim);
        // farthest-point init from a random first pick
        std::vector<int> chosen{int(rng.next_u32(uint32_t(n)))};
        for (int c = 1; c < k; ++c) {
            int far = -1;
            double far_d = -1;
            for (int i = 0; i < n; ++i) {
                double dmin = std::numeric_limits<double>::infinity();
                for (int j : chosen) dmin = std::min(dmin, dist2(&points[size_t(i) * dim], &points[size_t(j) * dim]));
                if (dmin > far_d) {
                    far_d = dmin;
                    far = i;
                }
            }
            chosen.push_back(far);
        }
        for (int c = 0; c < k; ++c)
            for (int d = 0; d < dim; ++d) centers[size_t(c) * dim + d] = points[size_t(chosen[c]) * dim + d];

        std::vector<int> assign(n, 0);
        for (int it = 0; it < iters; ++it) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double dmin = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    double dd = dist2(&points[size_t(i) * dim], &centers[size_t(c) * dim]);
                    if (dd < dmin) {
                        dmin = dd;
                        arg = c;
                    }
                }
                if (assign[i] != arg) {
                    assign[i] = arg;
                    changed = true;
                }
            }
            std::vector<double> sums(size_t(k) * dim, 0.0);
            std::vector<int> counts(k, 0);
            for (int i = 0; i < n; ++i) {
                ++counts[assign[i]];
                for (int d = 0; d < dim; ++d) sums[size_t(assign[i]) * dim + d] += points[size_t(i) * dim + d];
            }
            for (int c = 0; c < k; ++c) {
                if (counts[c] == 0) continue; // empty cluster keeps its center
                for (int d = 0; d < dim; ++d) centers[size_t(c) * dim + d] = sums[size_t(c) * dim + d] / counts[c];
            }
            if (!changed && it > 0) break;
        }

        double sse = 0;
        for (int i = 0; i < n; ++i) sse += dist2(&points[size_t(i) * dim], &centers[size_t(assign[i]) * dim]);
        if (sse < best.sse) {
            best.sse = sse;
            best.centers = centers;
            best.assign = assign;
        }
    }
    return best;
}

inline std::vector<double> kmeans_1d(const std::vector<double>& values, int k, uint64_t seed) {
    auto res = kmeans(values, int(values.size()), 1, k, seed);
    std::sort(res.centers.begin(), res.centers.end());
    return res.centers;
}

} // namespace matfit

#endif
