#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pahires/error.hpp"
#include "pahires/kinematics.hpp"
#include "pahires/tensor.hpp"

namespace pahires {

struct MetricReport {
    double psnr = 0;  // dB; +infinity when identical
    double ssim = 0;
    double l2p = 0;
    double l2q = 0;
    double npss = 0;
};

namespace metrics_detail {

inline void check_shapes(const Tensor& pred, const Tensor& truth,
                         const char* what) {
    if (!pred.same_shape(truth) || pred.rank() != 2)
        throw Error(ErrorKind::numeric,
                    std::string(what) + ": shape mismatch " +
                        pred.shape_string() + " vs " + truth.shape_string());
}

inline double data_range(const Tensor& truth) {
    double lo = truth[0], hi = truth[0];
    for (double v : truth.storage()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

}  // namespace metrics_detail

// 10*log10(R^2 / MSE) with R the ground-truth data range
inline double psnr(const Tensor& pred, const Tensor& truth) {
    metrics_detail::check_shapes(pred, truth, "psnr");
    double mse = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        mse += d * d;
    }
    mse /= double(pred.size());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    double range = metrics_detail::data_range(truth);
    if (range == 0)
        throw Error(ErrorKind::numeric,
                    "psnr: zero data range with nonzero error");
    return 10.0 * std::log10(range * range / mse);
}

// Standard windowed SSIM treating the T×D array as one single-channel
// image: 11×11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, dynamic
// range from the ground truth. Inputs smaller than the window fall back
// to one global uniform window.
inline double ssim(const Tensor& pred, const Tensor& truth) {
    metrics_detail::check_shapes(pred, truth, "ssim");
    const double range = metrics_detail::data_range(truth);
    if (range == 0) {
        if (pred == truth) return 1.0;
        throw Error(ErrorKind::numeric,
                    "ssim: zero dynamic range with differing inputs");
    }
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    const std::size_t T = pred.rows(), D = pred.cols();

    auto window_ssim = [&](const std::vector<double>& w, std::size_t r0,
                           std::size_t c0, std::size_t h, std::size_t wd) {
        double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < wd; ++j, ++k) {
                double a = pred(r0 + i, c0 + j), b = truth(r0 + i, c0 + j);
                mx += w[k] * a;
                my += w[k] * b;
                xx += w[k] * a * a;
                yy += w[k] * b * b;
                xy += w[k] * a * b;
            }
        double vx = xx - mx * mx, vy = yy - my * my, cxy = xy - mx * my;
        return ((2 * mx * my + c1) * (2 * cxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    };

    const std::size_t win = 11;
    if (T >= win && D >= win) {
        std::vector<double> w(win * win);
        double sigma = 1.5, sum = 0;
        for (std::size_t i = 0; i < win; ++i)
            for (std::size_t j = 0; j < win; ++j) {
                double di = double(i) - 5.0, dj = double(j) - 5.0;
                w[i * win + j] =
                    std::exp(-(di * di + dj * dj) / (2 * sigma * sigma));
                sum += w[i * win + j];
            }
        for (double& v : w) v /= sum;
        double acc = 0;
        std::size_t count = 0;
        for (std::size_t r = 0; r + win <= T; ++r)
            for (std::size_t c = 0; c + win <= D; ++c, ++count)
                acc += window_ssim(w, r, c, win, win);
        return acc / double(count);
    }
    std::vector<double> w(T * D, 1.0 / double(T * D));
    return window_ssim(w, 0, 0, T, D);
}

// Mean global joint position / quaternion distances after FK. Rows of
// pred/truth are motion frames in the skeleton's channel layout.
inline std::pair<double, double> l2p_l2q(const Tensor& pred,
                                         const Tensor& truth,
                                         const Skeleton& skel) {
    metrics_detail::check_shapes(pred, truth, "l2p/l2q");
    if (pred.cols() != skel.channel_count())
        throw Error(ErrorKind::data,
                    "l2p/l2q: row width does not match skeleton channels");
    const std::size_t T = pred.rows(), J = skel.joint_count();
    double pos_acc = 0, quat_acc = 0;
    for (std::size_t f = 0; f < T; ++f) {
        std::vector<double> prow(pred.data() + f * pred.cols(),
                                 pred.data() + (f + 1) * pred.cols());
        std::vector<double> trow(truth.data() + f * truth.cols(),
                                 truth.data() + (f + 1) * truth.cols());
        FkResult fp = forward_kinematics(skel, pose_from_frame(skel, prow));
        FkResult ft = forward_kinematics(skel, pose_from_frame(skel, trow));
        for (std::size_t j = 0; j < J; ++j) {
            double dp = 0;
            for (int k = 0; k < 3; ++k) {
                double d = fp.positions[j][std::size_t(k)] -
                           ft.positions[j][std::size_t(k)];
                dp += d * d;
            }
            pos_acc += std::sqrt(dp);

            Quaternion a = fp.rotations[j], b = ft.rotations[j];
            double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
            if (dot < 0) {  // hemisphere alignment
                a.w = -a.w; a.x = -a.x; a.y = -a.y; a.z = -a.z;
            }
            double dq = (a.w - b.w) * (a.w - b.w) + (a.x - b.x) * (a.x - b.x) +
                        (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z);
            quat_acc += std::sqrt(dq);
        }
    }
    double denom = double(T * J);
    return {pos_acc / denom, quat_acc / denom};
}

// Normalized power spectrum similarity: per-channel DFT power spectra
// (DC bin included), normalized to unit power, compared via the L1 gap of
// their cumulative distributions, aggregated weighted by truth power.
inline double npss(const Tensor& pred, const Tensor& truth) {
    metrics_detail::check_shapes(pred, truth, "npss");
    const std::size_t T = pred.rows(), D = pred.cols();
    if (T < 4) throw Error(ErrorKind::numeric, "npss: needs T >= 4");

    auto power_spectrum = [T](const Tensor& m, std::size_t col) {
        std::vector<double> p(T);
        for (std::size_t k = 0; k < T; ++k) {
            double re = 0, im = 0;
            for (std::size_t t = 0; t < T; ++t) {
                double ang = -2.0 * M_PI * double(k) * double(t) / double(T);
                re += m(t, col) * std::cos(ang);
                im += m(t, col) * std::sin(ang);
            }
            p[k] = re * re + im * im;
        }
        return p;
    };

    double acc = 0, weight_sum = 0;
    for (std::size_t j = 0; j < D; ++j) {
        std::vector<double> pt = power_spectrum(truth, j);
        double truth_power = 0;
        for (double v : pt) truth_power += v;
        if (truth_power == 0) continue;  // zero-power channel excluded
        std::vector<double> pp = power_spectrum(pred, j);
        double pred_power = 0;
        for (double v : pp) pred_power += v;

        double emd = 0, ct = 0, cp = 0;
        for (std::size_t k = 0; k < T; ++k) {
            ct += pt[k] / truth_power;
            cp += pred_power > 0 ? pp[k] / pred_power : 0.0;
            emd += std::abs(cp - ct);
        }
        acc += truth_power * emd;
        weight_sum += truth_power;
    }
    if (weight_sum == 0)
        throw Error(ErrorKind::numeric, "npss: all channels have zero power");
    return acc / weight_sum;
}

}  // namespace pahires
