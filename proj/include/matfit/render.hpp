// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_RENDER_HPP
#define MATFIT_RENDER_HPP

#include <vector>

#include "matfit/brdf.hpp"
#include "matfit/illum.hpp"
#include "matfit/mixture.hpp"
#include "matfit/normalmap.hpp"
#include "matfit/parallel.hpp"

namespace matfit {

// Forward model: per pixel, f = f_e + Rd * f_n, where f_e integrates the
// full BRDF against each emitter lobe over its support cap and f_n is SH
// irradiance (the non-emitter light was projected to SH with lobes already
// subtracted, so the two parts never double count). Orthographic camera,
// surface-to-camera direction +z. Output clamped at zero per channel.

inline const Vec3 kViewDir{0, 0, 1};
inline constexpr int kMaxLobes = 4;

inline std::vector<LobeQuad> build_lobe_quads(const Illumination& il, bool with_derivs) {
    if (int(il.lights.size()) > kMaxLobes)
        throw std::invalid_argument("render: too many lobes");
    std::vector<LobeQuad> quads(il.lights.size());
    for (size_t i = 0; i < il.lights.size(); ++i) quads[i].build(il.lights[i], with_derivs);
    return quads;
}

inline RGB render_pixel(const Material& mat, const Vec3& n, const std::vector<LobeQuad>& quads,
                        const SHCoeffs& sh) {
    RGB fe;
    for (const auto& quad : quads)
        for (int q = 0; q < quad.count; ++q) {
            double ci = dot(quad.dir[q], n);
            if (ci <= 0) continue;
            double lw = quad.weight[q] * quad.rad[q];
            if (lw <= 0) continue;
            fe += eval_brdf(mat, quad.dir[q], kViewDir, n) * (lw * ci);
        }
    RGB irr = sh.irradiance(n);
    RGB rd = mat.rd();
    return RGB(std::max(fe.r + rd.r * irr.r, 0.0), std::max(fe.g + rd.g * irr.g, 0.0),
               std::max(fe.b + rd.b * irr.b, 0.0));
}

inline ImageRGB render_fast(const Material& mat, const NormalMap& normals,
                            const Illumination& illum) {
    auto quads = build_lobe_quads(illum, false);
    ImageRGB img(normals.width, normals.height);
    parallel_for(normals.height, [&](int y) {
        for (int x = 0; x < normals.width; ++x) {
            if (!normals.mask.get(x, y)) continue;
            img.set(x, y, render_pixel(mat, normals.normal(x, y), quads, illum.sh));
        }
    });
    return img;
}

// f_n alone plus the lobes treated as pure irradiance sources (no BRDF);
// initialization divides the input by this.
inline ImageRGB render_irradiance(const NormalMap& normals, const Illumination& illum) {
    auto quads = build_lobe_quads(illum, false);
    ImageRGB img(normals.width, normals.height);
    parallel_for(normals.height, [&](int y) {
        for (int x = 0; x < normals.width; ++x) {
            if (!normals.mask.get(x, y)) continue;
            Vec3 n = normals.normal(x, y);
            double lobes = 0;
            for (const auto& quad : quads)
                for (int q = 0; q < quad.count; ++q) {
                    double ci = dot(quad.dir[q], n);
                    if (ci > 0) lobes += quad.weight[q] * quad.rad[q] * ci;
                }
            RGB irr = illum.sh.irradiance(n) + RGB(lobes);
            img.set(x, y, RGB(std::max(irr.r, 0.0), std::max(irr.g, 0.0), std::max(irr.b, 0.0)));
        }
    });
    return img;
}

// Per-pixel convex combination of per-material renders (the spatial mixture
// appearance model).
inline ImageRGB render_mix(const std::vector<Material>& mats, const MixtureField& weights,
                           const NormalMap& normals, const Illumination& illum) {
    if (int(mats.size()) != weights.k)
        throw std::invalid_argument("render_mix: material count does not match weight channels");
    auto quads = build_lobe_quads(illum, false);
    ImageRGB img(normals.width, normals.height);
    parallel_for(normals.height, [&](int y) {
        for (int x = 0; x < normals.width; ++x) {
            if (!normals.mask.get(x, y)) continue;
            Vec3 n = normals.normal(x, y);
            RGB acc;
            for (size_t j = 0; j < mats.size(); ++j) {
                double mw = weights.at(x, y, int(j));
                if (mw == 0) continue;
                acc += render_pixel(mats[j], n, quads, illum.sh) * mw;
            }
            img.set(x, y, acc);
        }
    });
    return img;
}

// ---------------------------------------------------------------------------
// Monte Carlo reference renderer (test oracle). Unbiased estimate of the
// same model integrals: per lobe, uniform sampling over the support cap;
// for the SH part, cosine-weighted hemisphere sampling of the band-limited
// radiance. Seeded per pixel index, so results do not depend on the thread
// count.

inline ImageRGB render_reference(const Material& mat, const NormalMap& normals,
                                 const Illumination& illum, int spp, uint64_t seed) {
    if (spp < 1) throw std::invalid_argument("render_reference: spp must be >= 1");
    ImageRGB img(normals.width, normals.height);
    RGB rd = mat.rd();

    // per-lobe support cap and frame
    struct CapInfo {
        LobeFrame fr;
        double cmin;
        GaussianLight light;
    };
    std::vector<CapInfo> caps;
    for (const auto& l : illum.lights) {
        double kw = std::max(l.kappa - 2.0 * l.beta, 0.0);
        caps.push_back({LobeFrame(l.az, l.el), detail::lobe_warp(0.0, kw).c, l});
    }

    parallel_for(normals.height, [&](int y) {
        for (int x = 0; x < normals.width; ++x) {
            if (!normals.mask.get(x, y)) continue;
            Vec3 n = normals.normal(x, y);
            Rng rng(hash_combine(seed, uint64_t(y) * normals.width + x));

            RGB fe;
            for (const auto& cap : caps) {
                double area = kTwoPi * (1.0 - cap.cmin);
                if (area <= 0) continue;
                RGB acc;
                for (int s = 0; s < spp; ++s) {
                    double c = cap.cmin + (1.0 - cap.cmin) * rng.uniform();
                    double phi = kTwoPi * rng.uniform();
                    double st = std::sqrt(std::max(0.0, 1.0 - c * c));
                    Vec3 w = c * cap.fr.D +
                             st * (std::cos(phi) * cap.fr.T1 + std::sin(phi) * cap.fr.T2);
                    double ci = dot(w, n);
                    if (ci <= 0) continue;
                    double rad = eval_kent(cap.light, w);
                    acc += eval_brdf(mat, w, kViewDir, n) * (rad * ci);
                }
                fe += acc * (area / spp);
            }

            // cosine-weighted estimate of integral sh(w) cos+ dw
            Vec3 t1 = std::abs(n.z) < 0.999 ? normalize(cross(Vec3{0, 0, 1}, n))
                                            : normalize(cross(Vec3{1, 0, 0}, n));
            Vec3 t2 = cross(n, t1);
            RGB fn;
            for (int s = 0; s < spp; ++s) {
                double u1 = rng.uniform(), u2 = rng.uniform();
                double ct = std::sqrt(u1);
                double st = std::sqrt(std::max(0.0, 1.0 - u1));
                double phi = kTwoPi * u2;
                Vec3 w = st * std::cos(phi) * t1 + st * std::sin(phi) * t2 + ct * n;
                fn += illum.sh.eval(w);
            }
            fn *= kPi / spp;

            img.set(x, y, RGB(std::max(fe.r + rd.r * fn.r, 0.0),
                              std::max(fe.g + rd.g * fn.g, 0.0),
                              std::max(fe.b + rd.b * fn.b, 0.0)));
        }
    });
    return img;
}

// Raw-envmap variant: the light has no emitter/non-emitter split, so the
// model BRDF is the constant diffuse Rd plus the microfacet specular term.
inline ImageRGB render_reference(const Material& mat, const NormalMap& normals,
                                 const ImageRGB& env, int spp, uint64_t seed) {
    if (spp < 1) throw std::invalid_argument("render_reference: spp must be >= 1");
    ImageRGB img(normals.width, normals.height);
    RGB rd = mat.rd();
    Material spec_only = mat;
    spec_only.rd_r = spec_only.rd_g = spec_only.rd_b = 0;

    auto lookup = [&](const Vec3& w) -> RGB {
        double theta = std::acos(std::clamp(w.z, -1.0, 1.0));
        double phi = std::atan2(w.y, w.x);
        if (phi < 0) phi += kTwoPi;
        int y = std::min(env.height - 1, int(theta / kPi * env.height));
        int x = std::min(env.width - 1, int(phi / kTwoPi * env.width));
        return env.at(x, y);
    };

    parallel_for(normals.height, [&](int y) {
        for (int x = 0; x < normals.width; ++x) {
            if (!normals.mask.get(x, y)) continue;
            Vec3 n = normals.normal(x, y);
            Rng rng(hash_combine(seed, uint64_t(y) * normals.width + x));
            Vec3 t1 = std::abs(n.z) < 0.999 ? normalize(cross(Vec3{0, 0, 1}, n))
                                            : normalize(cross(Vec3{1, 0, 0}, n));
            Vec3 t2 = cross(n, t1);
            RGB acc;
            for (int s = 0; s < spp; ++s) {
                double u1 = rng.uniform(), u2 = rng.uniform();
                double ct = std::sqrt(u1);
                double st = std::sqrt(std::max(0.0, 1.0 - u1));
                double phi = kTwoPi * u2;
                Vec3 w = st * std::cos(phi) * t1 + st * std::sin(phi) * t2 + ct * n;
                RGB light = lookup(w);
                // cosine pdf ct/pi cancels the cosine factor
                RGB spec = eval_brdf(spec_only, w, kViewDir, n);
                acc += RGB(light.r * (rd.r + spec.r), light.g * (rd.g + spec.g),
                           light.b * (rd.b + spec.b));
            }
            acc *= kPi / spp;
            img.set(x, y, RGB(std::max(acc.r, 0.0), std::max(acc.g, 0.0), std::max(acc.b, 0.0)));
        }
    });
    return img;
}

// ---------------------------------------------------------------------------
// Gradient-augmented pixel evaluation for the objective. All stored partials
// are gated by the final zero clamp per channel.

struct RenderGradFlags {
    bool mat = true;
    bool lobes = false;
    bool sh = false;
    bool normals = false;
};

struct LobeParamGrad {
    RGB d_az, d_el, d_int, d_kappa, d_beta, d_gamma;
};

struct PixelGrad {
    RGB f;
    RGB d_rd, d_rs, d_rough;
    int m = 0;
    LobeParamGrad lobe[kMaxLobes];
    std::array<double, kShCount> irr_y{}; // A_j Y_j(n), for the SH/PCA chain
    RGB rd_gated;                         // gate_c * rd_c
    RGB d_naz, d_nel;                     // normal azimuth/elevation partials
};

inline PixelGrad render_pixel_grad(const Material& mat, double naz, double nel,
                                   const std::vector<LobeQuad>& quads, const SHCoeffs& sh,
                                   const RenderGradFlags& flags) {
    PixelGrad out;
    out.m = int(quads.size());
    Vec3 n = dir_from_azel(naz, nel);
    Vec3 dn_daz, dn_del;
    NormalMap::normal_jacobian(naz, nel, dn_daz, dn_del);

    RGB fe, fe_drd, fe_drs, fe_drough, fe_naz, fe_nel;
    double fe_drd_scalar = 0;

    for (size_t li = 0; li < quads.size(); ++li) {
        const LobeQuad& quad = quads[li];
        LobeParamGrad& lg = out.lobe[li];
        for (int q = 0; q < quad.count; ++q) {
            const Vec3& wdir = quad.dir[q];
            double ci = dot(wdir, n);
            if (ci <= 0) continue;
            double wq = quad.weight[q];
            double rad = quad.rad[q];
            double lw = wq * rad;
            BrdfFull fb = eval_brdf_full(mat, wdir, kViewDir, n);
            RGB base = fb.f * (lw * ci);
            fe += base;

            if (flags.mat) {
                fe_drd_scalar += fb.d_rd * (lw * ci);
                fe_drs += fb.d_rs * (lw * ci);
                fe_drough += RGB(fb.d_rough * (lw * ci));
            }

            if (flags.lobes) {
                // contribution of moving the node by t: d(f_c * ci)/dt
                auto node_motion = [&](const Vec3& t) -> RGB {
                    double nt = dot(n, t);
                    double st = dot(fb.spec_dwi, t);
                    RGB dfc = fb.wi_n_coeff * nt + RGB(st);
                    return (dfc * ci + fb.f * nt) * lw;
                };
                lg.d_int += fb.f * (wq * quad.drad_dint[q] * ci);
                lg.d_gamma += fb.f * (wq * quad.drad_dgamma[q] * ci);
                lg.d_kappa += fb.f * ((quad.dweight_dkappa[q] * rad + wq * quad.drad_dkappa[q]) * ci) +
                              node_motion(quad.ddir_dkappa[q]);
                lg.d_beta += fb.f * ((quad.dweight_dbeta[q] * rad + wq * quad.drad_dbeta[q]) * ci) +
                             node_motion(quad.ddir_dbeta[q]);
                lg.d_az += node_motion(quad.ddir_daz[q]);
                lg.d_el += node_motion(quad.ddir_del[q]);
            }

            if (flags.normals) {
                // d(f_c * ci)/dn dotted with the az/el tangents
                auto normal_motion = [&](const Vec3& t) -> RGB {
                    double wit = dot(wdir, t), vot = dot(kViewDir, t);
                    double st = dot(fb.spec_dn, t);
                    RGB dfc = fb.n_wi_coeff * wit + fb.n_wo_coeff * vot + RGB(st);
                    return (dfc * ci + fb.f * wit) * lw;
                };
                fe_naz += normal_motion(dn_daz);
                fe_nel += normal_motion(dn_del);
            }
        }
    }

    auto y = sh_basis(n);
    for (int j = 0; j < kShCount; ++j) out.irr_y[j] = kIrradianceA[j] * y[j];
    RGB irr;
    for (int j = 0; j < kShCount; ++j) irr += sh.c[j] * out.irr_y[j];
    RGB rd = mat.rd();

    RGB pre = fe + rd * irr;
    RGB gate(pre.r > 0 ? 1.0 : 0.0, pre.g > 0 ? 1.0 : 0.0, pre.b > 0 ? 1.0 : 0.0);
    out.f = RGB(std::max(pre.r, 0.0), std::max(pre.g, 0.0), std::max(pre.b, 0.0));
    out.rd_gated = gate * rd;

    if (flags.mat) {
        out.d_rd = gate * (RGB(fe_drd_scalar) + irr); // df_c/drd_c
        out.d_rs = gate * fe_drs;
        out.d_rough = gate * fe_drough;
    }
    if (flags.lobes) {
        for (int li = 0; li < out.m; ++li) {
            LobeParamGrad& lg = out.lobe[li];
            lg.d_az = gate * lg.d_az;
            lg.d_el = gate * lg.d_el;
            lg.d_int = gate * lg.d_int;
            lg.d_kappa = gate * lg.d_kappa;
            lg.d_beta = gate * lg.d_beta;
            lg.d_gamma = gate * lg.d_gamma;
        }
    }
    if (flags.normals) {
        auto dy = sh_basis_grad(n);
        RGB irr_daz, irr_del;
        for (int j = 0; j < kShCount; ++j) {
            irr_daz += sh.c[j] * (kIrradianceA[j] * dot(dy[j], dn_daz));
            irr_del += sh.c[j] * (kIrradianceA[j] * dot(dy[j], dn_del));
        }
        out.d_naz = gate * (fe_naz + rd * irr_daz);
        out.d_nel = gate * (fe_nel + rd * irr_del);
    }
    return out;
}

} // namespace matfit

#endif
