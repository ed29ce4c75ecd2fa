// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_BRDF_HPP
#define MATFIT_BRDF_HPP

#include "matfit/common.hpp"

namespace matfit {

// Five-parameter isotropic material: RGB diffuse albedo, monochromatic
// specular albedo, scalar roughness (smaller = shinier).
struct Material {
    double rd_r = 0, rd_g = 0, rd_b = 0;
    double rs = 0;
    double rough = 0.5;

    RGB rd() const { return RGB(rd_r, rd_g, rd_b); }

    bool valid() const {
        auto in01 = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
        return in01(rd_r) && in01(rd_g) && in01(rd_b) && in01(rs) && in01(rough);
    }

    double operator[](int i) const {
        switch (i) {
            case 0: return rd_r;
            case 1: return rd_g;
            case 2: return rd_b;
            case 3: return rs;
            default: return rough;
        }
    }
    double& operator[](int i) {
        switch (i) {
            case 0: return rd_r;
            case 1: return rd_g;
            case 2: return rd_b;
            case 3: return rs;
            default: return rough;
        }
    }
};

// roughness below this evaluates at the floor (exponent singularity at r = 0)
inline constexpr double kRoughFloor = 1e-3;

// Blinn-style distribution exponent; r in (0,1] spans mirror-like to
// near-diffuse.
inline double rough_to_exponent(double rough) {
    double r = std::max(rough, kRoughFloor);
    return 2.0 / (r * r) - 2.0;
}

namespace detail {
inline constexpr double kDiffCoef = 28.0 / (23.0 * kPi);
}

// Coupled diffuse + microfacet specular substrate model, Schlick Fresnel.
// Directions point away from the surface; wi, wo, n unit. Below-horizon
// directions contribute zero.
inline RGB eval_brdf(const Material& m, const Vec3& wi, const Vec3& wo, const Vec3& n) {
    double ci = dot(wi, n), co = dot(wo, n);
    if (ci <= 0 || co <= 0) return RGB(0);

    double a = 1.0 - pow5(1.0 - 0.5 * ci);
    double b = 1.0 - pow5(1.0 - 0.5 * co);
    double dscale = detail::kDiffCoef * (1.0 - m.rs) * a * b;
    RGB f = m.rd() * dscale;

    Vec3 s = wi + wo;
    double slen = length(s);
    if (slen < 1e-12) return f;
    Vec3 h = s / slen;
    double hn = dot(h, n);
    double hd = dot(wi, h);
    if (hn <= 0 || hd <= 0) return f;

    double e = rough_to_exponent(m.rough);
    double dist = (e + 2.0) / kTwoPi * std::pow(hn, e);
    // Schlick-style grazing boost scaled by the albedo, so rs = 0 is black
    double fres = m.rs * (1.0 + (1.0 - m.rs) * pow5(1.0 - hd));
    double spec = dist * fres / (4.0 * hd * std::max(ci, co));
    f += RGB(spec);
    return f;
}

// Value plus every partial the renderer chains through: material params,
// incident direction wi, and shading normal n. The diffuse term is linear
// and channel-diagonal in Rd, so its direction partials factor into RGB
// coefficients against fixed vectors.
struct BrdfFull {
    RGB f;
    double d_rd = 0;  // df_c/drd_c, identical across channels
    RGB d_rs;
    double d_rough = 0;  // specular only, identical across channels
    // df_c/dwi = wi_n_coeff[c] * n + spec_dwi
    RGB wi_n_coeff;
    Vec3 spec_dwi;
    // df_c/dn = n_wi_coeff[c] * wi + n_wo_coeff[c] * wo + spec_dn
    RGB n_wi_coeff;
    RGB n_wo_coeff;
    Vec3 spec_dn;
};

inline BrdfFull eval_brdf_full(const Material& m, const Vec3& wi, const Vec3& wo, const Vec3& n) {
    BrdfFull out;
    double ci = dot(wi, n), co = dot(wo, n);
    if (ci <= 0 || co <= 0) return out;

    double ta = 1.0 - 0.5 * ci, tb = 1.0 - 0.5 * co;
    double a = 1.0 - pow5(ta);
    double b = 1.0 - pow5(tb);
    double da_dci = 2.5 * sqr(ta) * sqr(ta);  // (1 - ci/2)^4 * 5/2
    double db_dco = 2.5 * sqr(tb) * sqr(tb);
    double kd = detail::kDiffCoef * (1.0 - m.rs);
    RGB rd = m.rd();

    out.f = rd * (kd * a * b);
    out.d_rd = kd * a * b;
    out.d_rs = rd * (-detail::kDiffCoef * a * b);
    out.wi_n_coeff = rd * (kd * da_dci * b);
    out.n_wi_coeff = rd * (kd * da_dci * b);
    out.n_wo_coeff = rd * (kd * a * db_dco);

    Vec3 s = wi + wo;
    double slen = length(s);
    if (slen < 1e-12) return out;
    Vec3 h = s / slen;
    double hn = dot(h, n);
    double hd = dot(wi, h);
    if (hn <= 0 || hd <= 0) return out;

    double rc = std::max(m.rough, kRoughFloor);
    double e = 2.0 / (rc * rc) - 2.0;
    double dist = (e + 2.0) / kTwoPi * std::pow(hn, e);
    double g5 = pow5(1.0 - hd);
    double fres = m.rs * (1.0 + (1.0 - m.rs) * g5);
    double mx = std::max(ci, co);
    double denom = 4.0 * hd * mx;
    double spec = dist * fres / denom;
    out.f += RGB(spec);

    // material partials
    double dfres_drs = 1.0 + (1.0 - 2.0 * m.rs) * g5;
    out.d_rs += RGB(dist * dfres_drs / denom);
    if (m.rough >= kRoughFloor) {
        double de_dr = -4.0 / (rc * rc * rc);
        double ddist_de = dist * (1.0 / (e + 2.0) + std::log(hn));
        out.d_rough = ddist_de * de_dr * fres / denom;
    }

    // direction partials (shared across channels)
    Vec3 dhn_dwi = (n - hn * h) / slen;
    Vec3 dhd_dwi = h + (wi - hd * h) / slen;
    double ddist_dhn = dist * e / hn;
    double dfres_dhd = -5.0 * m.rs * (1.0 - m.rs) * sqr(sqr(1.0 - hd));
    Vec3 dmax_dwi = (ci >= co) ? n : Vec3{0, 0, 0};
    out.spec_dwi = (ddist_dhn * fres / denom) * dhn_dwi + (dist * dfres_dhd / denom) * dhd_dwi -
                   (spec / hd) * dhd_dwi - (spec / mx) * dmax_dwi;

    Vec3 dmax_dn = (ci >= co) ? wi : wo;
    out.spec_dn = (ddist_dhn * fres / denom) * h - (spec / mx) * dmax_dn;
    return out;
}

// 3x5 Jacobian: rows = R,G,B channels, columns = (rd_r, rd_g, rd_b, rs, rough).
inline void brdf_grad(const Material& m, const Vec3& wi, const Vec3& wo, const Vec3& n,
                      double jac[3][5]) {
    BrdfFull full = eval_brdf_full(m, wi, wo, n);
    for (int c = 0; c < 3; ++c)
        for (int p = 0; p < 5; ++p) jac[c][p] = 0;
    for (int c = 0; c < 3; ++c) {
        jac[c][c] = full.d_rd;
        jac[c][3] = full.d_rs[c];
        jac[c][4] = full.d_rough;
    }
}

} // namespace matfit

#endif
