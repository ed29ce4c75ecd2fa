// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_ILLUM_HPP
#define MATFIT_ILLUM_HPP

#include <array>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "matfit/image.hpp"
#include "matfit/kent.hpp"
#include "matfit/kmeans.hpp"
#include "matfit/lbfgs.hpp"
#include "matfit/sh.hpp"

namespace matfit {

inline constexpr int kPcaComponents = 7; // of 9; the two smallest modes are discarded

// Parametric illumination: emitter lobes + 2nd-order SH for everything else.
struct Illumination {
    std::vector<GaussianLight> lights;
    SHCoeffs sh;

    static Illumination uniform_sky(double radiance) {
        Illumination il;
        // constant radiance c has the single coefficient c / Y00
        il.sh.c[0] = RGB(radiance / shc::c0);
        return il;
    }
};

// Statistics over a set of fitted environments: lobe-shape cluster centers,
// per-channel PCA of SH coefficients, and the view-weighted gray-world
// integral vector.
struct IlluminationPrior {
    std::vector<double> kappa_means;
    std::vector<double> beta_means;
    std::array<std::array<double, kShCount>, 3> pca_mean{};
    std::array<std::array<std::array<double, kPcaComponents>, kShCount>, 3> pca_basis{};
    std::array<double, kShCount> gray{};

    bool empty() const { return kappa_means.empty(); }
};

using PcaWeights = std::array<std::array<double, kPcaComponents>, 3>;

// ---------------------------------------------------------------------------
// Lat-long mapping. Row 0 is the +z pole of the lighting sphere (+z points
// from the object toward the camera); theta is the polar angle from +z and
// phi = 0 is the +x meridian.

inline Vec3 envmap_dir(int x, int y, int w, int h) {
    double theta = kPi * (y + 0.5) / h;
    double phi = kTwoPi * (x + 0.5) / w;
    double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

inline double envmap_pixel_solid_angle(int y, int w, int h) {
    double theta = kPi * (y + 0.5) / h;
    return std::sin(theta) * (kPi / h) * (kTwoPi / w);
}

inline SHCoeffs sh_project_envmap(const ImageRGB& env) {
    SHCoeffs out;
    for (int y = 0; y < env.height; ++y) {
        double dw = envmap_pixel_solid_angle(y, env.width, env.height);
        for (int x = 0; x < env.width; ++x) {
            auto basis = sh_basis(envmap_dir(x, y, env.width, env.height));
            RGB v = env.at(x, y);
            for (int i = 0; i < kShCount; ++i) out.c[i] += v * (basis[i] * dw);
        }
    }
    return out;
}

// Lat-long image of the parametric model: lobes plus the (clamped) SH
// reconstruction.
inline ImageRGB illum_to_envmap(const Illumination& il, int w, int h) {
    ImageRGB img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            Vec3 d = envmap_dir(x, y, w, h);
            double lobes = 0;
            for (const auto& l : il.lights) lobes += eval_kent(l, d);
            RGB sh = il.sh.eval(d);
            img.set(x, y, RGB(std::max(sh.r + lobes, 0.0), std::max(sh.g + lobes, 0.0),
                              std::max(sh.b + lobes, 0.0)));
        }
    return img;
}

// ---------------------------------------------------------------------------
// Gray-world integral vector. G_i = integral of Y_i(w) * W(w) over the
// sphere, W(w) = cos((theta_v - pi)/2) with theta_v the angle between the
// view direction (-z) and w; equivalently sqrt((1 + w_z)/2), largest for
// light in front of the object.

inline std::array<double, kShCount> grayworld_vector(int resolution = 512) {
    std::vector<double> nodes, weights;
    gauss_legendre(resolution, nodes, weights);
    std::array<double, kShCount> g{};
    double dphi = kTwoPi / resolution;
    for (int i = 0; i < resolution; ++i) {
        double cz = nodes[i];
        double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
        double wq = weights[i] * dphi * std::sqrt(0.5 * (1.0 + cz));
        for (int j = 0; j < resolution; ++j) {
            double phi = (j + 0.5) * dphi;
            Vec3 d{sz * std::cos(phi), sz * std::sin(phi), cz};
            auto basis = sh_basis(d);
            for (int k = 0; k < kShCount; ++k) g[k] += basis[k] * wq;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// PCA reparameterization of the SH coefficients.

inline SHCoeffs sh_from_weights(const IlluminationPrior& prior, const PcaWeights& w) {
    SHCoeffs out;
    for (int ch = 0; ch < 3; ++ch)
        for (int i = 0; i < kShCount; ++i) {
            double v = prior.pca_mean[ch][i];
            for (int j = 0; j < kPcaComponents; ++j) v += prior.pca_basis[ch][i][j] * w[ch][j];
            out.c[i][ch] = v;
        }
    return out;
}

inline PcaWeights weights_from_sh(const IlluminationPrior& prior, const SHCoeffs& sh) {
    PcaWeights w{};
    for (int ch = 0; ch < 3; ++ch)
        for (int j = 0; j < kPcaComponents; ++j) {
            double acc = 0;
            for (int i = 0; i < kShCount; ++i)
                acc += prior.pca_basis[ch][i][j] * (sh.c[i][ch] - prior.pca_mean[ch][i]);
            w[ch][j] = acc;
        }
    return w;
}

// ---------------------------------------------------------------------------
// Environment-map fitting.

namespace detail {

inline ImageRGB downsample_env(const ImageRGB& env, int max_h) {
    if (env.height <= max_h) return env;
    int h = max_h, w = 2 * max_h;
    ImageRGB out(w, h);
    int fy = env.height / h + 1, fx = env.width / w + 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            // box average over the source footprint
            int sy0 = y * env.height / h, sy1 = std::max(sy0 + 1, (y + 1) * env.height / h);
            int sx0 = x * env.width / w, sx1 = std::max(sx0 + 1, (x + 1) * env.width / w);
            RGB acc;
            int cnt = 0;
            for (int sy = sy0; sy < sy1; ++sy)
                for (int sx = sx0; sx < sx1; ++sx) {
                    acc += env.at(sx, sy);
                    ++cnt;
                }
            out.set(x, y, acc / cnt);
        }
    (void)fx;
    (void)fy;
    return out;
}

struct EnvPeak {
    Vec3 dir;
    double value;
};

// Local maxima of a spherically blurred copy, above 3x the blurred median,
// with greedy 20-degree suppression. Matches the construction the lobe
// count is defined by.
inline std::vector<EnvPeak> detect_env_peaks(const ImageRGB& env) {
    ImageRGB small = downsample_env(env, 32);
    int w = small.width, h = small.height;
    std::vector<double> gray(size_t(w) * h);
    std::vector<Vec3> dirs(size_t(w) * h);
    std::vector<double> dws(size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t i = size_t(y) * w + x;
            gray[i] = small.at(x, y).mean();
            dirs[i] = envmap_dir(x, y, w, h);
            dws[i] = envmap_pixel_solid_angle(y, w, h);
        }

    const double sigma = deg2rad(5.0);
    const double s2 = sigma * sigma;
    const double cut = 1.0 - 12.0 * s2; // kernel support
    std::vector<double> blur(gray.size(), 0.0);
    for (size_t p = 0; p < gray.size(); ++p) {
        double acc = 0, norm = 0;
        for (size_t q = 0; q < gray.size(); ++q) {
            double c = dot(dirs[p], dirs[q]);
            if (c < cut) continue;
            double k = std::exp((c - 1.0) / s2) * dws[q];
            acc += k * gray[q];
            norm += k;
        }
        blur[p] = acc / std::max(norm, 1e-30);
    }

    std::vector<double> sorted = blur;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double median = sorted[sorted.size() / 2];
    double thresh = 3.0 * median;

    std::vector<EnvPeak> maxima;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t i = size_t(y) * w + x;
            if (blur[i] <= thresh) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int ny = y + dy;
                    int nx = (x + dx + w) % w; // azimuth wraps
                    if (ny < 0 || ny >= h) continue;
                    if (blur[size_t(ny) * w + nx] >= blur[i]) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) maxima.push_back({dirs[i], blur[i]});
        }

    std::sort(maxima.begin(), maxima.end(),
              [](const EnvPeak& a, const EnvPeak& b) { return a.value > b.value; });
    std::vector<EnvPeak> kept;
    double min_cos = std::cos(deg2rad(20.0));
    for (const auto& m : maxima) {
        bool close = false;
        for (const auto& k : kept)
            if (dot(m.dir, k.dir) > min_cos) {
                close = true;
                break;
            }
        if (!close) kept.push_back(m);
    }
    return kept;
}

} // namespace detail

// Fit the lighting model to a lat-long radiance image: the lobe count comes
// from peak detection, lobe parameters from constrained nonlinear least
// squares (with a per-channel constant absorbing the floor), and the SH part
// from projecting the non-negative lobe residual.
inline Illumination fit_envmap(const ImageRGB& env, int max_lights = 3) {
    if (env.width < 32 || env.height < 16)
        throw std::invalid_argument("fit_envmap: environment smaller than 16x32");
    double maxv = 0;
    for (float v : env.data) {
        if (!std::isfinite(v) || v < 0) throw std::invalid_argument("fit_envmap: non-finite or negative pixels");
        maxv = std::max(maxv, double(v));
    }
    Illumination out;
    if (maxv == 0) return out; // all-dark sky: zero lights, zero SH

    auto peaks = detail::detect_env_peaks(env);
    int m = std::min<int>(int(peaks.size()), max_lights);

    if (m > 0) {
        ImageRGB fitimg = detail::downsample_env(env, 64);
        int w = fitimg.width, h = fitimg.height;
        std::vector<double> med;
        for (float v : fitimg.data) med.push_back(v);
        std::nth_element(med.begin(), med.begin() + med.size() / 2, med.end());
        double floor0 = med[med.size() / 2];

        // state: per lobe (az, el, I, kappa, b, gamma), then c_rgb
        int nvar = m * 6 + 3;
        std::vector<double> x0(nvar), lo(nvar), hi(nvar);
        for (int l = 0; l < m; ++l) {
            double az, el;
            azel_from_dir(peaks[l].dir, az, el);
            x0[l * 6 + 0] = az;
            x0[l * 6 + 1] = el;
            x0[l * 6 + 2] = std::max(peaks[l].value - floor0, 1e-3 * maxv);
            x0[l * 6 + 3] = 20.0;
            x0[l * 6 + 4] = 0.0;
            x0[l * 6 + 5] = 0.0;
            lo[l * 6 + 0] = az - kPi;
            hi[l * 6 + 0] = az + kPi;
            lo[l * 6 + 1] = -kPi / 2 + 1e-3;
            hi[l * 6 + 1] = kPi / 2 - 1e-3;
            lo[l * 6 + 2] = 0.0;
            hi[l * 6 + 2] = 1e8;
            lo[l * 6 + 3] = 1e-3;
            hi[l * 6 + 3] = 2000.0;
            lo[l * 6 + 4] = 0.0;
            hi[l * 6 + 4] = 1.0;
            lo[l * 6 + 5] = -kTwoPi;
            hi[l * 6 + 5] = kTwoPi;
        }
        for (int c = 0; c < 3; ++c) {
            x0[m * 6 + c] = floor0;
            lo[m * 6 + c] = 0.0;
            hi[m * 6 + c] = 1e8;
        }

        double total_dw = 0;
        for (int y = 0; y < h; ++y) total_dw += envmap_pixel_solid_angle(y, w, h) * w;

        auto objective = [&](const std::vector<double>& x, std::vector<double>& grad) {
            std::fill(grad.begin(), grad.end(), 0.0);
            std::vector<GaussianLight> lights(m);
            for (int l = 0; l < m; ++l) {
                lights[l].az = x[l * 6 + 0];
                lights[l].el = x[l * 6 + 1];
                lights[l].intensity = x[l * 6 + 2];
                lights[l].kappa = x[l * 6 + 3];
                lights[l].beta = x[l * 6 + 4] * 0.5 * x[l * 6 + 3];
                lights[l].gamma = x[l * 6 + 5];
            }
            double energy = 0;
            std::vector<KentEval> evals(m);
            for (int y = 0; y < h; ++y) {
                double dw = envmap_pixel_solid_angle(y, w, h) / total_dw;
                for (int px = 0; px < w; ++px) {
                    Vec3 d = envmap_dir(px, y, w, h);
                    double lobes = 0;
                    for (int l = 0; l < m; ++l) {
                        evals[l] = eval_kent_grad(lights[l], d);
                        lobes += evals[l].v;
                    }
                    RGB val = fitimg.at(px, y);
                    for (int c = 0; c < 3; ++c) {
                        double res = val[c] - x[m * 6 + c] - lobes;
                        energy += dw * res * res;
                        double dres = -2.0 * dw * res;
                        grad[m * 6 + c] += dres;
                        for (int l = 0; l < m; ++l) {
                            const auto& ev = evals[l];
                            grad[l * 6 + 0] += dres * ev.d_az;
                            grad[l * 6 + 1] += dres * ev.d_el;
                            grad[l * 6 + 2] += dres * ev.d_intensity;
                            grad[l * 6 + 3] += dres * (ev.d_kappa + ev.d_beta * 0.5 * x[l * 6 + 4]);
                            grad[l * 6 + 4] += dres * ev.d_beta * 0.5 * x[l * 6 + 3];
                            grad[l * 6 + 5] += dres * ev.d_gamma;
                        }
                    }
                }
            }
            return energy;
        };

        LbfgsOptions opts;
        opts.max_iters = 300;
        auto res = lbfgs_minimize(objective, x0, lo, hi, opts);

        out.lights.resize(m);
        for (int l = 0; l < m; ++l) {
            GaussianLight& gl = out.lights[l];
            gl.az = std::remainder(res.x[l * 6 + 0], kTwoPi);
            gl.el = res.x[l * 6 + 1];
            gl.intensity = res.x[l * 6 + 2];
            gl.kappa = res.x[l * 6 + 3];
            gl.beta = res.x[l * 6 + 4] * 0.5 * gl.kappa;
            double g = std::fmod(res.x[l * 6 + 5], kPi);
            gl.gamma = g < 0 ? g + kPi : g;
        }
        std::sort(out.lights.begin(), out.lights.end(),
                  [](const GaussianLight& a, const GaussianLight& b) { return a.intensity > b.intensity; });
    }

    // SH of the non-negative lobe residual at full resolution
    ImageRGB residual(env.width, env.height);
    for (int y = 0; y < env.height; ++y)
        for (int x = 0; x < env.width; ++x) {
            Vec3 d = envmap_dir(x, y, env.width, env.height);
            double lobes = 0;
            for (const auto& l : out.lights) lobes += eval_kent(l, d);
            RGB v = env.at(x, y);
            residual.set(x, y, RGB(std::max(v.r - lobes, 0.0), std::max(v.g - lobes, 0.0),
                                   std::max(v.b - lobes, 0.0)));
        }
    out.sh = sh_project_envmap(residual);
    return out;
}

// ---------------------------------------------------------------------------
// Prior construction: fit every environment, cluster the lobe shapes, PCA
// the SH coefficients per channel (keeping 7 of 9 components).

inline IlluminationPrior build_prior(const std::vector<ImageRGB>& envs, int n_kappa_clusters,
                                     int n_beta_clusters, int max_lights = 3, uint64_t seed = 1) {
    if (int(envs.size()) < 8) throw std::invalid_argument("build_prior: need at least 8 environments");
    if (int(envs.size()) < n_kappa_clusters || int(envs.size()) < n_beta_clusters)
        throw std::invalid_argument("build_prior: fewer environments than clusters");

    std::vector<double> kappas, betas;
    std::vector<SHCoeffs> coeffs;
    for (const auto& env : envs) {
        Illumination il = fit_envmap(env, max_lights);
        for (const auto& l : il.lights) {
            kappas.push_back(l.kappa);
            betas.push_back(l.beta);
        }
        coeffs.push_back(il.sh);
    }

    IlluminationPrior prior;
    // lobe-free datasets keep the declared default shape cluster
    if (kappas.empty()) {
        prior.kappa_means.assign(n_kappa_clusters, 20.0);
        prior.beta_means.assign(n_beta_clusters, 0.0);
    } else {
        while (int(kappas.size()) < n_kappa_clusters) kappas.push_back(kappas.back());
        while (int(betas.size()) < n_beta_clusters) betas.push_back(betas.back());
        prior.kappa_means = kmeans_1d(kappas, n_kappa_clusters, seed);
        prior.beta_means = kmeans_1d(betas, n_beta_clusters, hash_combine(seed, 2));
    }

    const int n = int(coeffs.size());
    for (int ch = 0; ch < 3; ++ch) {
        Eigen::MatrixXd data(kShCount, n);
        for (int e = 0; e < n; ++e)
            for (int i = 0; i < kShCount; ++i) data(i, e) = coeffs[e].c[i][ch];
        Eigen::VectorXd mean = data.rowwise().mean();
        Eigen::MatrixXd centered = data.colwise() - mean;
        Eigen::MatrixXd cov = centered * centered.transpose() / double(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        // eigenvalues ascending; keep the top kPcaComponents, descending
        for (int i = 0; i < kShCount; ++i) prior.pca_mean[ch][i] = mean[i];
        for (int j = 0; j < kPcaComponents; ++j) {
            Eigen::VectorXd v = eig.eigenvectors().col(kShCount - 1 - j);
            // deterministic sign: largest-magnitude entry positive
            int arg = 0;
            for (int i = 1; i < kShCount; ++i)
                if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
            if (v[arg] < 0) v = -v;
            for (int i = 0; i < kShCount; ++i) prior.pca_basis[ch][i][j] = v[i];
        }
    }
    prior.gray = grayworld_vector();
    return prior;
}

// Minimal prior for tests and prior-less runs: default lobe shape cluster,
// PCA basis = first 7 canonical axes around the given mean.
inline IlluminationPrior trivial_prior(const SHCoeffs& mean) {
    IlluminationPrior prior;
    prior.kappa_means = {20.0};
    prior.beta_means = {0.0};
    for (int ch = 0; ch < 3; ++ch) {
        for (int i = 0; i < kShCount; ++i) prior.pca_mean[ch][i] = mean.c[i][ch];
        for (int j = 0; j < kPcaComponents; ++j) prior.pca_basis[ch][j][j] = 1.0;
    }
    prior.gray = grayworld_vector();
    return prior;
}

// ---------------------------------------------------------------------------
// Serialization (versioned structured text).

inline std::string illum_to_text(const Illumination& il) {
    std::ostringstream out;
    out.precision(17);
    out << "matfit-illum 1\n";
    out << "lights " << il.lights.size() << "\n";
    for (const auto& l : il.lights)
        out << l.az << " " << l.el << " " << l.intensity << " " << l.kappa << " " << l.beta
            << " " << l.gamma << "\n";
    out << "sh\n";
    for (int i = 0; i < kShCount; ++i)
        out << il.sh.c[i].r << " " << il.sh.c[i].g << " " << il.sh.c[i].b << "\n";
    return out.str();
}

inline Illumination illum_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "matfit-illum" || version != 1)
        throw std::runtime_error("illumination file: bad header");
    std::string tag;
    size_t m = 0;
    in >> tag >> m;
    if (tag != "lights") throw std::runtime_error("illumination file: expected lights");
    Illumination il;
    il.lights.resize(m);
    for (auto& l : il.lights) in >> l.az >> l.el >> l.intensity >> l.kappa >> l.beta >> l.gamma;
    in >> tag;
    if (tag != "sh") throw std::runtime_error("illumination file: expected sh");
    for (int i = 0; i < kShCount; ++i) in >> il.sh.c[i].r >> il.sh.c[i].g >> il.sh.c[i].b;
    if (!in) throw std::runtime_error("illumination file: truncated");
    return il;
}

inline std::string prior_to_text(const IlluminationPrior& p) {
    std::ostringstream out;
    out.precision(17);
    out << "matfit-prior 1\n";
    out << "kappa_means " << p.kappa_means.size();
    for (double v : p.kappa_means) out << " " << v;
    out << "\nbeta_means " << p.beta_means.size();
    for (double v : p.beta_means) out << " " << v;
    out << "\n";
    const char* ch_names[3] = {"r", "g", "b"};
    for (int ch = 0; ch < 3; ++ch) {
        out << "pca_mean_" << ch_names[ch];
        for (int i = 0; i < kShCount; ++i) out << " " << p.pca_mean[ch][i];
        out << "\npca_basis_" << ch_names[ch] << "\n";
        for (int i = 0; i < kShCount; ++i) {
            for (int j = 0; j < kPcaComponents; ++j) out << (j ? " " : "") << p.pca_basis[ch][i][j];
            out << "\n";
        }
    }
    out << "gray";
    for (int i = 0; i < kShCount; ++i) out << " " << p.gray[i];
    out << "\n";
    return out.str();
}

inline IlluminationPrior prior_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string magic, tag;
    int version = 0;
    in >> magic >> version;
    if (magic != "matfit-prior" || version != 1) throw std::runtime_error("prior file: bad header");
    IlluminationPrior p;
    size_t n = 0;
    in >> tag >> n;
    if (tag != "kappa_means") throw std::runtime_error("prior file: expected kappa_means");
    p.kappa_means.resize(n);
    for (double& v : p.kappa_means) in >> v;
    in >> tag >> n;
    if (tag != "beta_means") throw std::runtime_error("prior file: expected beta_means");
    p.beta_means.resize(n);
    for (double& v : p.beta_means) in >> v;
    for (int ch = 0; ch < 3; ++ch) {
        in >> tag;
        for (int i = 0; i < kShCount; ++i) in >> p.pca_mean[ch][i];
        in >> tag;
        for (int i = 0; i < kShCount; ++i)
            for (int j = 0; j < kPcaComponents; ++j) in >> p.pca_basis[ch][i][j];
    }
    in >> tag;
    for (int i = 0; i < kShCount; ++i) in >> p.gray[i];
    if (!in) throw std::runtime_error("prior file: truncated");
    return p;
}

} // namespace matfit

#endif
