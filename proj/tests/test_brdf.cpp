// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "matfit/brdf.hpp"
#include "matfit/common.hpp"
#include "matfit/kent.hpp"

using namespace matfit;

namespace {

Vec3 random_hemisphere_dir(Rng& rng) {
    // uniform over the upper hemisphere (z > 0)
    double z = rng.uniform(0.05, 1.0);
    double phi = rng.uniform(0, kTwoPi);
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

Material random_material(Rng& rng) {
    Material m;
    m.rd_r = rng.uniform(0.05, 0.95);
    m.rd_g = rng.uniform(0.05, 0.95);
    m.rd_b = rng.uniform(0.05, 0.95);
    m.rs = rng.uniform(0.05, 0.95);
    m.rough = rng.uniform(0.08, 0.95);
    return m;
}

} // namespace

TEST_CASE("substrate diffuse term at normal incidence") {
    Material m;
    m.rd_r = m.rd_g = m.rd_b = 1.0;
    m.rs = 0.0;
    m.rough = 0.5;
    Vec3 n{0, 0, 1};
    RGB f = eval_brdf(m, n, n, n);
    double expected = 28.0 / (23.0 * kPi) * sqr(1.0 - pow5(1.0 - 0.5));
    CHECK(f.r == Catch::Approx(expected).epsilon(1e-12));
    CHECK(f.g == Catch::Approx(expected).epsilon(1e-12));
    CHECK(f.r == Catch::Approx(0.3637).margin(5e-5));
}

TEST_CASE("zero albedo gives zero reflection everywhere") {
    Material m;
    m.rd_r = m.rd_g = m.rd_b = 0.0;
    m.rs = 0.0;
    m.rough = 0.3;
    Rng rng(7);
    Vec3 n{0, 0, 1};
    for (int i = 0; i < 50; ++i) {
        RGB f = eval_brdf(m, random_hemisphere_dir(rng), random_hemisphere_dir(rng), n);
        CHECK(f.r == 0.0);
        CHECK(f.g == 0.0);
        CHECK(f.b == 0.0);
    }
}

TEST_CASE("Helmholtz reciprocity") {
    Rng rng(11);
    Vec3 n{0, 0, 1};
    for (int i = 0; i < 200; ++i) {
        Material m = random_material(rng);
        Vec3 wi = random_hemisphere_dir(rng), wo = random_hemisphere_dir(rng);
        RGB a = eval_brdf(m, wi, wo, n);
        RGB b = eval_brdf(m, wo, wi, n);
        CHECK(std::abs(a.r - b.r) < 1e-12);
        CHECK(std::abs(a.g - b.g) < 1e-12);
        CHECK(std::abs(a.b - b.b) < 1e-12);
    }
}

TEST_CASE("non-negativity") {
    Rng rng(13);
    Vec3 n{0, 0, 1};
    for (int i = 0; i < 500; ++i) {
        Material m = random_material(rng);
        RGB f = eval_brdf(m, random_hemisphere_dir(rng), random_hemisphere_dir(rng), n);
        CHECK(f.r >= 0.0);
        CHECK(f.g >= 0.0);
        CHECK(f.b >= 0.0);
    }
}

TEST_CASE("hemispherical energy bound") {
    // quadrature of f(wi, wo) (wi.n) over the wi hemisphere stays below 1.05
    std::vector<double> gn, gw;
    gauss_legendre(64, gn, gw);
    const int nphi = 128;
    Vec3 n{0, 0, 1};
    Rng rng(17);
    double worst = 0;
    for (int trial = 0; trial < 40; ++trial) {
        Material m = random_material(rng);
        Vec3 wo = random_hemisphere_dir(rng);
        RGB acc;
        for (int i = 0; i < 64; ++i) {
            double ci = 0.5 * (gn[i] + 1.0); // wi.n in (0,1)
            double w = 0.5 * gw[i] * (kTwoPi / nphi);
            double s = std::sqrt(std::max(0.0, 1.0 - ci * ci));
            for (int j = 0; j < nphi; ++j) {
                double phi = (j + 0.5) * kTwoPi / nphi;
                Vec3 wi{s * std::cos(phi), s * std::sin(phi), ci};
                acc += eval_brdf(m, wi, wo, n) * (w * ci);
            }
        }
        worst = std::max(worst, acc.max_component());
        CHECK(acc.max_component() <= 1.05);
    }
    INFO("worst albedo " << worst);
}

TEST_CASE("peak specular value non-increasing in roughness") {
    Rng rng(19);
    Vec3 n{0, 0, 1};
    for (int trial = 0; trial < 20; ++trial) {
        Material m = random_material(rng);
        Vec3 wo = random_hemisphere_dir(rng);
        Vec3 wi = reflect(wo, n); // half vector = n, the specular peak
        double prev = std::numeric_limits<double>::infinity();
        for (double rough = 0.05; rough <= 1.0; rough += 0.05) {
            m.rough = rough;
            double v = eval_brdf(m, wi, wo, n).r;
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("diffuse gradient is the coefficient, independent of rd") {
    Rng rng(23);
    Vec3 n{0, 0, 1};
    for (int i = 0; i < 20; ++i) {
        Material m = random_material(rng);
        m.rs = 0.0;
        Vec3 wi = random_hemisphere_dir(rng), wo = random_hemisphere_dir(rng);
        double jac_a[3][5], jac_b[3][5];
        brdf_grad(m, wi, wo, n, jac_a);
        m.rd_r = rng.uniform(0, 1);
        brdf_grad(m, wi, wo, n, jac_b);
        double ci = dot(wi, n), co = dot(wo, n);
        double coef = 28.0 / (23.0 * kPi) * (1.0 - pow5(1.0 - 0.5 * ci)) * (1.0 - pow5(1.0 - 0.5 * co));
        CHECK(jac_a[0][0] == Catch::Approx(coef).epsilon(1e-12));
        CHECK(jac_b[0][0] == Catch::Approx(jac_a[0][0]).epsilon(1e-12));
    }
}

TEST_CASE("specular albedo gradient matches finite differences at rd = 0") {
    Material m;
    m.rd_r = m.rd_g = m.rd_b = 0.0;
    m.rs = 0.4;
    m.rough = 0.3;
    Vec3 n{0, 0, 1};
    double jac[3][5];
    brdf_grad(m, n, n, n, jac);
    const double h = 1e-5;
    Material mp = m, mm = m;
    mp.rs += h;
    mm.rs -= h;
    double fd = (eval_brdf(mp, n, n, n).r - eval_brdf(mm, n, n, n).r) / (2 * h);
    CHECK(jac[0][3] == Catch::Approx(fd).epsilon(1e-4));
}

TEST_CASE("full material Jacobian matches finite differences") {
    Rng rng(29);
    Vec3 n{0, 0, 1};
    double max_rel = 0;
    for (int i = 0; i < 100; ++i) {
        Material m = random_material(rng);
        Vec3 wi = random_hemisphere_dir(rng), wo = random_hemisphere_dir(rng);
        double jac[3][5];
        brdf_grad(m, wi, wo, n, jac);
        const double h = 1e-5;
        for (int p = 0; p < 5; ++p) {
            Material mp = m, mm = m;
            mp[p] += h;
            mm[p] -= h;
            RGB fp = eval_brdf(mp, wi, wo, n), fm = eval_brdf(mm, wi, wo, n);
            for (int c = 0; c < 3; ++c) {
                double fd = (fp[c] - fm[c]) / (2 * h);
                double rel = std::abs(jac[c][p] - fd) / std::max({std::abs(fd), std::abs(jac[c][p]), 1e-6});
                max_rel = std::max(max_rel, rel);
            }
        }
    }
    CHECK(max_rel < 1e-3);
}

TEST_CASE("direction and normal partials match finite differences") {
    // exercises the chains the renderer relies on (wi held on the sphere)
    Rng rng(31);
    double max_rel = 0;
    for (int i = 0; i < 60; ++i) {
        Material m = random_material(rng);
        Vec3 wo = random_hemisphere_dir(rng);
        double az = rng.uniform(-kPi, kPi), el = rng.uniform(0.1, 1.4);
        double naz = rng.uniform(-kPi, kPi), nel = rng.uniform(1.2, 1.55);
        Vec3 n = dir_from_azel(naz, nel);
        Vec3 wi = dir_from_azel(az, el);
        if (dot(wi, n) < 0.05 || dot(wo, n) < 0.05) continue;
        BrdfFull full = eval_brdf_full(m, wi, wo, n);

        const double h = 1e-6;
        auto check = [&](double fd, double an, const char* what) {
            double rel = std::abs(an - fd) / std::max({std::abs(fd), std::abs(an), 1e-5});
            INFO(what);
            CHECK(rel < 2e-3);
            max_rel = std::max(max_rel, rel);
        };

        // wi moved along the sphere via azimuth
        RGB fp = eval_brdf(m, dir_from_azel(az + h, el), wo, n);
        RGB fm = eval_brdf(m, dir_from_azel(az - h, el), wo, n);
        Vec3 t = (dir_from_azel(az + h, el) - dir_from_azel(az - h, el)) / (2 * h);
        for (int c = 0; c < 3; ++c) {
            double an = full.wi_n_coeff[c] * dot(n, t) + dot(full.spec_dwi, t);
            check((fp[c] - fm[c]) / (2 * h), an, "d/dwi");
        }

        // n moved along the sphere via elevation
        Vec3 np = dir_from_azel(naz, nel + h), nm = dir_from_azel(naz, nel - h);
        fp = eval_brdf(m, wi, wo, np);
        fm = eval_brdf(m, wi, wo, nm);
        Vec3 tn = (np - nm) / (2 * h);
        for (int c = 0; c < 3; ++c) {
            double an = full.n_wi_coeff[c] * dot(wi, tn) + full.n_wo_coeff[c] * dot(wo, tn) +
                        dot(full.spec_dn, tn);
            check((fp[c] - fm[c]) / (2 * h), an, "d/dn");
        }
    }
    INFO("max rel " << max_rel);
}
