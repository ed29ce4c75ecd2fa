// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_KENT_HPP
#define MATFIT_KENT_HPP

#include <vector>

#include "matfit/common.hpp"

namespace matfit {

// Emitter lobe: peak-normalized Kent (spherical Gaussian) distribution.
// value(x) = intensity * exp(kappa (g1.x - 1) + beta ((g2.x)^2 - (g3.x)^2))
// where g1 is the mean direction and g2, g3 the rotated tangent axes.
struct GaussianLight {
    double az = 0;        // azimuth, radians
    double el = 0;        // elevation, radians
    double intensity = 0; // peak radiance, >= 0
    double kappa = 0;     // concentration, >= 0
    double beta = 0;      // ellipticalness, 0 <= beta <= kappa/2
    double gamma = 0;     // rotation about the direction, [0, pi)

    bool valid() const {
        return std::isfinite(az) && std::isfinite(el) && intensity >= 0 && kappa >= 0 &&
               beta >= 0 && beta <= 0.5 * kappa + 1e-12 && std::isfinite(gamma);
    }
};

inline Vec3 dir_from_azel(double az, double el) {
    double ce = std::cos(el), se = std::sin(el);
    return {ce * std::cos(az), ce * std::sin(az), se};
}

inline void azel_from_dir(const Vec3& d, double& az, double& el) {
    el = std::asin(std::clamp(d.z, -1.0, 1.0));
    az = std::atan2(d.y, d.x);
}

// Tangent frame attached to (az, el), smooth away from the poles, plus the
// partials the solver chains through. dT1/del = -D and dT2/del = 0.
struct LobeFrame {
    Vec3 D, T1, T2;
    Vec3 dD_daz, dD_del, dT1_daz, dT2_daz;

    LobeFrame(double az, double el) {
        double ca = std::cos(az), sa = std::sin(az);
        double ce = std::cos(el), se = std::sin(el);
        D = {ce * ca, ce * sa, se};
        T1 = {-se * ca, -se * sa, ce};
        T2 = {sa, -ca, 0};
        dD_daz = {-ce * sa, ce * ca, 0};
        dD_del = T1;
        dT1_daz = {se * sa, -se * ca, 0};
        dT2_daz = {ca, sa, 0};
    }
};

inline double eval_kent(const GaussianLight& l, const Vec3& x) {
    LobeFrame fr(l.az, l.el);
    Vec3 g2 = std::cos(l.gamma) * fr.T1 + std::sin(l.gamma) * fr.T2;
    Vec3 g3 = -std::sin(l.gamma) * fr.T1 + std::cos(l.gamma) * fr.T2;
    double e = l.kappa * (dot(fr.D, x) - 1.0) + l.beta * (sqr(dot(g2, x)) - sqr(dot(g3, x)));
    return l.intensity * std::exp(e);
}

// Pointwise value + parameter partials, used by the envmap fitter.
struct KentEval {
    double v = 0;
    double d_az = 0, d_el = 0, d_intensity = 0, d_kappa = 0, d_beta = 0, d_gamma = 0;
};

inline KentEval eval_kent_grad(const GaussianLight& l, const Vec3& x) {
    LobeFrame fr(l.az, l.el);
    double cg = std::cos(l.gamma), sg = std::sin(l.gamma);
    Vec3 g2 = cg * fr.T1 + sg * fr.T2;
    Vec3 g3 = -sg * fr.T1 + cg * fr.T2;
    double ca = dot(fr.D, x);
    double p2 = dot(g2, x), p3 = dot(g3, x);
    double e = l.kappa * (ca - 1.0) + l.beta * (p2 * p2 - p3 * p3);
    KentEval out;
    out.v = l.intensity * std::exp(e);
    out.d_intensity = std::exp(e);
    out.d_kappa = out.v * (ca - 1.0);
    out.d_beta = out.v * (p2 * p2 - p3 * p3);
    out.d_gamma = out.v * l.beta * 4.0 * p2 * p3;
    Vec3 dg2_daz = cg * fr.dT1_daz + sg * fr.dT2_daz;
    Vec3 dg3_daz = -sg * fr.dT1_daz + cg * fr.dT2_daz;
    out.d_az = out.v * (l.kappa * dot(fr.dD_daz, x) +
                        2.0 * l.beta * (p2 * dot(dg2_daz, x) - p3 * dot(dg3_daz, x)));
    Vec3 dg2_del = cg * (-1.0 * fr.D);
    Vec3 dg3_del = -sg * (-1.0 * fr.D);
    out.d_el = out.v * (l.kappa * dot(fr.dD_del, x) +
                        2.0 * l.beta * (p2 * dot(dg2_del, x) - p3 * dot(dg3_del, x)));
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature over the lobe support region Omega_e (where the lobe exceeds
// kLobeSupportFloor x peak). Radial nodes are Gauss-Legendre in a warped
// coordinate that follows the lobe falloff, so one fixed 16x16 rule covers
// kappa from 0 (uniform sphere) to hundreds. The warp concentration is
// kappa_w = kappa - 2 beta, the slowest falloff direction of the ellipse.
// Everything is analytic in the lobe parameters; the derivative blocks feed
// the objective gradient.

inline constexpr double kLobeSupportFloor = 1e-3;
inline constexpr int kLobeQuadRadial = 16;
inline constexpr int kLobeQuadAzimuth = 16;

namespace detail {

// cos(alpha) profile of the warp and its partials. Returns c, dc/du scaled
// weight factor c' = dc/du, and d/dkappa_w of both.
struct WarpPoint {
    double c;        // cos(alpha) at this radial node
    double cp;       // dc/du (enters the quadrature weight)
    double dc_dkw;   // d c / d kappa_w
    double dcp_dkw;  // d cp / d kappa_w
};

inline WarpPoint lobe_warp(double u, double kw) {
    WarpPoint o;
    if (kw < 1e-6) {
        // series around the uniform-sphere limit
        o.c = (2.0 * u - 1.0) + kw * 2.0 * u * (1.0 - u);
        o.cp = 2.0 + kw * 2.0 * (1.0 - 2.0 * u);
        o.dc_dkw = 2.0 * u * (1.0 - u);
        o.dcp_dkw = 2.0 * (1.0 - 2.0 * u);
        return o;
    }
    double kcap = -0.5 * std::log(kLobeSupportFloor); // support cutoff switches here
    if (kw <= kcap) {
        // full sphere: p = exp(-2 kw) still above the support floor
        double p = std::exp(-2.0 * kw);
        double omp = -std::expm1(-2.0 * kw); // 1 - p
        double q = 1.0 + (u - 1.0) * omp;
        double lnq = std::log1p((u - 1.0) * omp);
        o.c = 1.0 + lnq / kw;
        o.cp = omp / (kw * q);
        o.dc_dkw = (u - 1.0) * 2.0 * p / (q * kw) - lnq / (kw * kw);
        o.dcp_dkw = 2.0 * p / (kw * q) - omp / (kw * kw * q) -
                    omp * (u - 1.0) * 2.0 * p / (kw * q * q);
    } else {
        // truncated at the support floor
        double p = kLobeSupportFloor;
        double omp = 1.0 - p;
        double q = u * omp + p;
        double lnq = std::log(q);
        o.c = 1.0 + lnq / kw;
        o.cp = omp / (kw * q);
        o.dc_dkw = -lnq / (kw * kw);
        o.dcp_dkw = -o.cp / kw;
    }
    return o;
}

inline const std::vector<double>& lobe_gl_nodes() {
    static std::vector<double> nodes = [] {
        std::vector<double> n, w;
        gauss_legendre(kLobeQuadRadial, n, w);
        for (double& x : n) x = 0.5 * (x + 1.0);
        return n;
    }();
    return nodes;
}

inline const std::vector<double>& lobe_gl_weights() {
    static std::vector<double> weights = [] {
        std::vector<double> n, w;
        gauss_legendre(kLobeQuadRadial, n, w);
        for (double& x : w) x *= 0.5;
        return w;
    }();
    return weights;
}

} // namespace detail

// Node set for one lobe. Weight already contains the warp Jacobian and the
// azimuthal step; sum_q weight_q * radiance_q approximates the lobe's
// integral over Omega_e.
struct LobeQuad {
    int count = 0;
    std::vector<Vec3> dir;
    std::vector<double> weight;
    std::vector<double> rad;

    // derivative blocks, filled when with_derivs
    std::vector<double> dweight_dkappa, dweight_dbeta;
    std::vector<double> drad_dint, drad_dkappa, drad_dbeta, drad_dgamma;
    std::vector<Vec3> ddir_dkappa, ddir_dbeta, ddir_daz, ddir_del;

    void build(const GaussianLight& l, bool with_derivs) {
        const auto& us = detail::lobe_gl_nodes();
        const auto& uw = detail::lobe_gl_weights();
        const int n = kLobeQuadRadial * kLobeQuadAzimuth;
        count = n;
        dir.resize(n);
        weight.resize(n);
        rad.resize(n);
        if (with_derivs) {
            dweight_dkappa.resize(n);
            dweight_dbeta.resize(n);
            drad_dint.resize(n);
            drad_dkappa.resize(n);
            drad_dbeta.resize(n);
            drad_dgamma.resize(n);
            ddir_dkappa.resize(n);
            ddir_dbeta.resize(n);
            ddir_daz.resize(n);
            ddir_del.resize(n);
        }

        LobeFrame fr(l.az, l.el);
        double kw = std::max(l.kappa - 2.0 * l.beta, 0.0);
        double dphi = kTwoPi / kLobeQuadAzimuth;

        int q = 0;
        for (int i = 0; i < kLobeQuadRadial; ++i) {
            auto wp = detail::lobe_warp(us[i], kw);
            double c = std::clamp(wp.c, -1.0, 1.0);
            double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            double wbase = uw[i] * dphi;
            for (int j = 0; j < kLobeQuadAzimuth; ++j, ++q) {
                double phi = (j + 0.5) * dphi;
                double cphi = std::cos(phi), sphi = std::sin(phi);
                Vec3 tphi = cphi * fr.T1 + sphi * fr.T2;
                dir[q] = c * fr.D + s * tphi;
                weight[q] = wbase * wp.cp;

                double cc2 = std::cos(2.0 * (phi - l.gamma));
                double g = l.kappa * (c - 1.0) + l.beta * (1.0 - c * c) * cc2;
                double eg = std::exp(g);
                rad[q] = l.intensity * eg;

                if (!with_derivs) continue;

                double dg_dc = l.kappa - 2.0 * l.beta * c * cc2;
                // kappa_w chain: d kw/d kappa = 1, d kw/d beta = -2
                double dc_dkappa = wp.dc_dkw;
                double dc_dbeta = -2.0 * wp.dc_dkw;

                dweight_dkappa[q] = wbase * wp.dcp_dkw;
                dweight_dbeta[q] = wbase * -2.0 * wp.dcp_dkw;

                drad_dint[q] = eg;
                drad_dkappa[q] = rad[q] * ((c - 1.0) + dg_dc * dc_dkappa);
                drad_dbeta[q] = rad[q] * ((1.0 - c * c) * cc2 + dg_dc * dc_dbeta);
                drad_dgamma[q] = rad[q] * l.beta * (1.0 - c * c) * 2.0 * std::sin(2.0 * (phi - l.gamma));

                Vec3 dw_dc = fr.D - (s > 1e-9 ? (c / s) : 0.0) * tphi;
                ddir_dkappa[q] = dc_dkappa * dw_dc;
                ddir_dbeta[q] = dc_dbeta * dw_dc;
                ddir_daz[q] = c * fr.dD_daz + s * (cphi * fr.dT1_daz + sphi * fr.dT2_daz);
                ddir_del[q] = c * fr.dD_del + s * (cphi * (-1.0 * fr.D));
            }
        }
    }

    // integral of the lobe radiance over its support
    double power() const {
        double acc = 0;
        for (int q = 0; q < count; ++q) acc += weight[q] * rad[q];
        return acc;
    }
};

} // namespace matfit

#endif
