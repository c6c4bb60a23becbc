#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pahires/error.hpp"
#include "pahires/metrics.hpp"
#include "pahires/model.hpp"
#include "pahires/motion.hpp"

namespace pahires {

// Query the model at T' = round((T-1)*scale)+1 uniform coordinates in
// [0,1]; the output frame rate scales accordingly. scale < 1 performs
// continuous downsampling through the same queries.
inline MotionSequence interpolate(const Model& model,
                                  const MotionSequence& seq, double scale) {
    seq.validate();
    if (!(scale > 0))
        throw Error(ErrorKind::config, "interpolate: scale must be > 0");
    std::size_t T = seq.length();
    std::size_t out_len =
        std::size_t(round_half_away(double(T - 1) * scale)) + 1;
    if (out_len < 2)
        throw Error(ErrorKind::config, "interpolate: output too short");
    std::vector<double> ts(out_len);
    for (std::size_t k = 0; k < out_len; ++k)
        ts[k] = double(k) / double(out_len - 1);
    MotionSequence out;
    out.frames = predict_frames(model, seq, ts);
    out.fps = seq.fps * scale;
    out.layout = seq.layout;
    return out;
}

// Query n_out uniform coordinates in [0,1]; used by evaluation where the
// output grid must land exactly on the original frames.
inline MotionSequence reconstruct(const Model& model,
                                  const MotionSequence& seq,
                                  std::size_t n_out) {
    seq.validate();
    if (n_out < 2)
        throw Error(ErrorKind::config, "reconstruct: need at least 2 frames");
    std::vector<double> ts(n_out);
    for (std::size_t k = 0; k < n_out; ++k)
        ts[k] = double(k) / double(n_out - 1);
    MotionSequence out;
    out.frames = predict_frames(model, seq, ts);
    out.fps = seq.fps * double(n_out - 1) / double(seq.length() - 1);
    out.layout = seq.layout;
    return out;
}

struct GapSpec {
    std::size_t start = 0;
    std::size_t length = 0;
};

// Zero-shot inbetweening: masked frames never reach the encoders, their
// coordinates are re-queried, and unmasked frames pass through untouched.
inline MotionSequence inbetween(const Model& model, const MotionSequence& seq,
                                const GapSpec& gap) {
    seq.validate();
    if (gap.length == 0) return seq;
    if (gap.start == 0 || gap.start + gap.length >= seq.length())
        throw Error(ErrorKind::config,
                    "inbetween: gap must be strictly inside the sequence "
                    "(use extrapolate for ends)");
    GapMask mask{gap.start, gap.start + gap.length};
    std::vector<double> ts(gap.length);
    for (std::size_t k = 0; k < gap.length; ++k)
        ts[k] = double(gap.start + k) / double(seq.length() - 1);

    MotionSequence out = seq;
    MotionSequence norm = normalize(model, seq);
    Graph g;
    ParamIds ids;
    register_params(g, model, /*trainable=*/false, ids);
    Tensor pred = g.value(build_prediction(g, model, ids, norm, ts, &mask));
    denormalize_rows(model, pred);
    for (std::size_t k = 0; k < gap.length; ++k)
        for (std::size_t j = 0; j < seq.dim(); ++j)
            out.frames(gap.start + k, j) = pred(k, j);
    return out;
}

// Uniform queries over [t_min, t_max]; coordinates outside [0,1] lean on
// fully clamped clips, so the reference is the boundary context.
inline MotionSequence extrapolate(const Model& model,
                                  const MotionSequence& seq, double t_min,
                                  double t_max, std::size_t count) {
    seq.validate();
    if (count < 1)
        throw Error(ErrorKind::config, "extrapolate: count must be >= 1");
    if (!(t_max >= t_min))
        throw Error(ErrorKind::config, "extrapolate: need t_max >= t_min");
    std::vector<double> ts(count);
    for (std::size_t k = 0; k < count; ++k)
        ts[k] = count == 1 ? t_min
                           : t_min + (t_max - t_min) * double(k) /
                                         double(count - 1);
    MotionSequence out;
    out.frames = predict_frames(model, seq, ts);
    out.fps = count == 1 ? seq.fps
                         : double(count - 1) /
                               ((t_max - t_min) * double(seq.length() - 1) /
                                seq.fps);
    out.layout = seq.layout;
    return out;
}

// ---- evaluation --------------------------------------------------------

struct EvalRow {
    std::string sequence;
    double scale = 0;
    double psnr = 0;
    double ssim = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;       // one per (sequence, scale)
    std::vector<EvalRow> aggregate;  // mean per scale, sequence = "mean"
};

// PAHIRES_THREADS caps worker threads for per-sequence evaluation;
// unset or 1 keeps it serial.
inline unsigned eval_thread_count() {
    if (const char* env = std::getenv("PAHIRES_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return unsigned(n);
    }
    return 1;
}

// Degrade each sequence by each factor, reconstruct on the original grid,
// and score. Rows come out in dataset order regardless of which worker
// finished first.
inline EvalReport evaluate(const Model& model,
                           const std::vector<std::pair<std::string,
                                                       MotionSequence>>& data,
                           const std::vector<double>& scales) {
    if (data.empty())
        throw Error(ErrorKind::data, "evaluate: no sequences");
    EvalReport report;
    for (double scale : scales) {
        std::vector<EvalRow> rows(data.size());
        auto score_one = [&](std::size_t i) {
            const auto& [name, seq] = data[i];
            MotionSequence degraded = downsample(seq, scale);
            double span = scale * double(degraded.length() - 1);
            std::size_t last =
                std::min(seq.length() - 1, std::size_t(span + 1e-9));
            MotionSequence recon = reconstruct(model, degraded, last + 1);
            Tensor truth({last + 1, seq.dim()});
            std::copy(seq.frames.data(),
                      seq.frames.data() + (last + 1) * seq.dim(),
                      truth.data());
            rows[i] = {name, scale, psnr(recon.frames, truth),
                       ssim(recon.frames, truth)};
        };
        unsigned workers = std::min<unsigned>(
            eval_thread_count(), unsigned(data.size()));
        if (workers <= 1) {
            for (std::size_t i = 0; i < data.size(); ++i) score_one(i);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> threads;
            std::vector<std::exception_ptr> errors(workers);
            for (unsigned w = 0; w < workers; ++w)
                threads.emplace_back([&, w] {
                    try {
                        for (std::size_t i = next++; i < data.size();
                             i = next++)
                            score_one(i);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            for (std::thread& t : threads) t.join();
            for (const std::exception_ptr& e : errors)
                if (e) std::rethrow_exception(e);
        }
        double psnr_acc = 0, ssim_acc = 0;
        std::size_t finite_psnr = 0;
        for (const EvalRow& row : rows) {
            if (std::isfinite(row.psnr)) {
                psnr_acc += row.psnr;
                ++finite_psnr;
            }
            ssim_acc += row.ssim;
            report.rows.push_back(row);
        }
        EvalRow agg;
        agg.sequence = "mean";
        agg.scale = scale;
        agg.psnr = finite_psnr
                       ? psnr_acc / double(finite_psnr)
                       : std::numeric_limits<double>::infinity();
        agg.ssim = ssim_acc / double(data.size());
        report.aggregate.push_back(agg);
    }
    return report;
}

inline void write_eval_csv(std::ostream& os, const EvalReport& report) {
    os << "sequence,scale,psnr,ssim\n";
    char buf[160];
    auto emit = [&](const EvalRow& r) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n",
                      r.sequence.c_str(), r.scale, r.psnr, r.ssim);
        os << buf;
    };
    for (const EvalRow& r : report.rows) emit(r);
    for (const EvalRow& r : report.aggregate) emit(r);
}

// aligned scale × metric table, one row per scale
inline void write_eval_table(std::ostream& os, const EvalReport& report) {
    os << std::left << std::setw(10) << "Scale" << std::right << std::setw(12)
       << "PSNR" << std::setw(12) << "SSIM" << "\n";
    for (const EvalRow& r : report.aggregate) {
        std::ostringstream scale;
        scale << "x" << r.scale;
        os << std::left << std::setw(10) << scale.str() << std::right
           << std::fixed << std::setprecision(3) << std::setw(12) << r.psnr
           << std::setw(12) << r.ssim << "\n";
    }
    os.unsetf(std::ios::fixed);
}

}  // namespace pahires
