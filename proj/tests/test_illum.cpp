// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "matfit/illum.hpp"

using namespace matfit;

namespace {

// lat-long image of a constant radiance
ImageRGB constant_env(int w, int h, RGB c) {
    ImageRGB img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.set(x, y, c);
    return img;
}

ImageRGB lobe_env(int w, int h, const GaussianLight& l, double floor) {
    ImageRGB img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = eval_kent(l, envmap_dir(x, y, w, h)) + floor;
            img.set(x, y, RGB(v));
        }
    return img;
}

} // namespace

TEST_CASE("gray-world vector analytic entries") {
    auto g = grayworld_vector();
    // W is azimuthally symmetric about +z: 1-D integrals in cos(theta)
    double g0 = shc::c0 * 8.0 * kPi / 3.0;
    double g2 = shc::c1 * kTwoPi * 4.0 / 15.0;          // Y_{1,0}
    double g6 = shc::c3 * kTwoPi * (-8.0 / 105.0);      // Y_{2,0}
    CHECK(g[0] == Catch::Approx(g0).epsilon(1e-7));
    CHECK(g[2] == Catch::Approx(g2).epsilon(1e-7));
    CHECK(g[6] == Catch::Approx(g6).epsilon(1e-7));
    // everything odd in x or y integrates to zero
    for (int i : {1, 3, 4, 5, 7, 8}) CHECK(std::abs(g[i]) < 1e-6);
}

TEST_CASE("gray-world vector quadrature is converged and deterministic") {
    auto a = grayworld_vector(512);
    auto b = grayworld_vector(1024);
    for (int i = 0; i < kShCount; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6);
    auto c = grayworld_vector(512);
    for (int i = 0; i < kShCount; ++i) CHECK(a[i] == c[i]); // bit-identical
}

TEST_CASE("sh_from_weights: zero weights give the mean, and the map is affine") {
    SHCoeffs mean;
    Rng rng(3);
    for (int i = 0; i < kShCount; ++i) mean.c[i] = RGB(rng.normal(), rng.normal(), rng.normal());
    auto prior = trivial_prior(mean);

    PcaWeights zero{};
    SHCoeffs at_zero = sh_from_weights(prior, zero);
    for (int i = 0; i < kShCount; ++i)
        for (int ch = 0; ch < 3; ++ch)
            CHECK(at_zero.c[i][ch] == Catch::Approx(mean.c[i][ch]).margin(1e-15));

    PcaWeights w{};
    for (auto& cw : w)
        for (auto& v : cw) v = rng.normal();
    PcaWeights w2 = w;
    for (auto& cw : w2)
        for (auto& v : cw) v *= 2.0;
    SHCoeffs s0 = sh_from_weights(prior, zero);
    SHCoeffs s1 = sh_from_weights(prior, w);
    SHCoeffs s2 = sh_from_weights(prior, w2);
    for (int i = 0; i < kShCount; ++i)
        for (int ch = 0; ch < 3; ++ch)
            CHECK(s2.c[i][ch] - s1.c[i][ch] ==
                  Catch::Approx(s1.c[i][ch] - s0.c[i][ch]).margin(1e-12));
}

TEST_CASE("weights round-trip up to the discarded complement") {
    SHCoeffs mean;
    auto prior = trivial_prior(mean); // basis = canonical e1..e7
    Rng rng(5);
    SHCoeffs s;
    for (int i = 0; i < kPcaComponents; ++i) s.c[i] = RGB(rng.normal(), rng.normal(), rng.normal());
    // s lies in the basis span, so projection reproduces it exactly
    PcaWeights w = weights_from_sh(prior, s);
    SHCoeffs back = sh_from_weights(prior, w);
    for (int i = 0; i < kShCount; ++i)
        for (int ch = 0; ch < 3; ++ch)
            CHECK(back.c[i][ch] == Catch::Approx(s.c[i][ch]).margin(1e-12));
}

TEST_CASE("fit_envmap rejects bad input") {
    CHECK_THROWS_AS(fit_envmap(constant_env(8, 4, RGB(1))), std::invalid_argument);
    ImageRGB nan_env = constant_env(64, 32, RGB(1));
    nan_env.data[10] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(fit_envmap(nan_env), std::invalid_argument);
}

TEST_CASE("fit_envmap: uniform sky") {
    double c = 0.8;
    Illumination il = fit_envmap(constant_env(64, 32, RGB(c)));
    CHECK(il.lights.empty());
    CHECK(il.sh.c[0].r == Catch::Approx(c / shc::c0).epsilon(0.01));
    for (int i = 1; i < kShCount; ++i) CHECK(std::abs(il.sh.c[i].r) < 0.01 * c / shc::c0);
}

TEST_CASE("fit_envmap: all-zero sky gives zero model") {
    Illumination il = fit_envmap(constant_env(64, 32, RGB(0)));
    CHECK(il.lights.empty());
    for (int i = 0; i < kShCount; ++i) CHECK(il.sh.c[i].r == 0.0);
}

TEST_CASE("fit_envmap: single lobe round trip") {
    GaussianLight truth;
    truth.az = 0.9;
    truth.el = 0.5;
    truth.intensity = 6.0;
    truth.kappa = 50.0;
    truth.beta = 0.0;
    truth.gamma = 0.0;
    ImageRGB env = lobe_env(128, 64, truth, 0.2);
    Illumination il = fit_envmap(env, 3);
    REQUIRE(il.lights.size() == 1);
    const auto& l = il.lights[0];
    double angle = rad2deg(std::acos(std::clamp(
        dot(dir_from_azel(l.az, l.el), dir_from_azel(truth.az, truth.el)), -1.0, 1.0)));
    CHECK(angle < 2.0);
    CHECK(std::abs(l.kappa - truth.kappa) / truth.kappa < 0.10);
}

TEST_CASE("fit_envmap: two antipodal peaks give two lobes") {
    GaussianLight a, b;
    a.az = 0.4;
    a.el = 0.7;
    a.intensity = 5.0;
    a.kappa = 60;
    b = a;
    Vec3 d = dir_from_azel(a.az, a.el);
    azel_from_dir(-1.0 * d, b.az, b.el);
    ImageRGB env(128, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 128; ++x) {
            Vec3 w = envmap_dir(x, y, 128, 64);
            env.set(x, y, RGB(eval_kent(a, w) + eval_kent(b, w) + 0.1));
        }
    Illumination il = fit_envmap(env, 3);
    CHECK(il.lights.size() == 2);
}

TEST_CASE("fit_envmap is idempotent at desk scale") {
    GaussianLight truth;
    truth.az = -0.6;
    truth.el = 0.35;
    truth.intensity = 4.0;
    truth.kappa = 40.0;
    ImageRGB env = lobe_env(128, 64, truth, 0.15);
    Illumination first = fit_envmap(env, 3);
    REQUIRE(first.lights.size() == 1);
    ImageRGB rendered = illum_to_envmap(first, 128, 64);
    Illumination second = fit_envmap(rendered, 3);
    REQUIRE(second.lights.size() == 1);
    double angle = rad2deg(std::acos(std::clamp(
        dot(dir_from_azel(first.lights[0].az, first.lights[0].el),
            dir_from_azel(second.lights[0].az, second.lights[0].el)),
        -1.0, 1.0)));
    CHECK(angle < 1.0);
}

TEST_CASE("build_prior input validation") {
    std::vector<ImageRGB> envs(4, constant_env(64, 32, RGB(1)));
    CHECK_THROWS_AS(build_prior(envs, 2, 2), std::invalid_argument);
    std::vector<ImageRGB> nine(9, constant_env(64, 32, RGB(1)));
    CHECK_THROWS_AS(build_prior(nine, 12, 2), std::invalid_argument);
}

TEST_CASE("build_prior: identical environments give degenerate statistics") {
    GaussianLight l;
    l.az = 0.3;
    l.el = 0.6;
    l.intensity = 5.0;
    l.kappa = 35.0;
    ImageRGB env = lobe_env(64, 32, l, 0.2);
    std::vector<ImageRGB> envs(10, env);
    IlluminationPrior prior = build_prior(envs, 2, 2);

    // all cluster centers coincide at the single fitted lobe shape
    CHECK(prior.kappa_means.size() == 2);
    CHECK(prior.kappa_means[0] == Catch::Approx(prior.kappa_means[1]).margin(1e-9));
    CHECK(std::abs(prior.kappa_means[0] - l.kappa) / l.kappa < 0.15);
    CHECK(prior.beta_means[0] == Catch::Approx(prior.beta_means[1]).margin(1e-9));

    // PCA basis columns stay orthonormal even on a zero-variance cloud
    for (int ch = 0; ch < 3; ++ch)
        for (int j = 0; j < kPcaComponents; ++j)
            for (int j2 = j; j2 < kPcaComponents; ++j2) {
                double d = 0;
                for (int i = 0; i < kShCount; ++i)
                    d += prior.pca_basis[ch][i][j] * prior.pca_basis[ch][i][j2];
                CHECK(d == Catch::Approx(j == j2 ? 1.0 : 0.0).margin(1e-8));
            }
}

TEST_CASE("build_prior recovers two kappa clusters") {
    std::vector<ImageRGB> envs;
    Rng rng(11);
    for (int i = 0; i < 10; ++i) {
        GaussianLight l;
        l.az = rng.uniform(-2.0, 2.0);
        l.el = rng.uniform(-0.8, 0.8);
        l.intensity = 5.0;
        l.kappa = (i % 2 == 0) ? 10.0 : 100.0;
        envs.push_back(lobe_env(96, 48, l, 0.2));
    }
    IlluminationPrior prior = build_prior(envs, 2, 2);
    REQUIRE(prior.kappa_means.size() == 2);
    CHECK(std::abs(prior.kappa_means[0] - 10.0) / 10.0 < 0.15);
    CHECK(std::abs(prior.kappa_means[1] - 100.0) / 100.0 < 0.15);
}

TEST_CASE("illumination and prior serialization round trip") {
    Illumination il;
    GaussianLight l;
    l.az = 0.25;
    l.el = -0.4;
    l.intensity = 2.0;
    l.kappa = 33.0;
    l.beta = 4.0;
    l.gamma = 0.9;
    il.lights.push_back(l);
    Rng rng(13);
    for (int i = 0; i < kShCount; ++i) il.sh.c[i] = RGB(rng.normal(), rng.normal(), rng.normal());
    Illumination back = illum_from_text(illum_to_text(il));
    REQUIRE(back.lights.size() == 1);
    CHECK(back.lights[0].kappa == il.lights[0].kappa);
    for (int i = 0; i < kShCount; ++i)
        for (int ch = 0; ch < 3; ++ch) CHECK(back.sh.c[i][ch] == il.sh.c[i][ch]);

    SHCoeffs mean;
    for (int i = 0; i < kShCount; ++i) mean.c[i] = RGB(rng.normal(), rng.normal(), rng.normal());
    IlluminationPrior prior = trivial_prior(mean);
    IlluminationPrior pback = prior_from_text(prior_to_text(prior));
    CHECK(pback.kappa_means == prior.kappa_means);
    for (int ch = 0; ch < 3; ++ch)
        for (int i = 0; i < kShCount; ++i) {
            CHECK(pback.pca_mean[ch][i] == prior.pca_mean[ch][i]);
            for (int j = 0; j < kPcaComponents; ++j)
                CHECK(pback.pca_basis[ch][i][j] == prior.pca_basis[ch][i][j]);
        }
    for (int i = 0; i < kShCount; ++i) CHECK(pback.gray[i] == prior.gray[i]);

    CHECK_THROWS(illum_from_text("garbage"));
    CHECK_THROWS(prior_from_text("matfit-prior 2\n"));
}
