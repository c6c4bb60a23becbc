#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pahires/error.hpp"
#include "pahires/tensor.hpp"

namespace pahires {

enum class FeatureLayout : std::uint32_t { raw = 0, joint_euler = 1 };

// A fixed-frame-rate signal: T frames of D features each. This is the thing
// the implicit representation is trained to reproduce continuously.
struct MotionSequence {
    Tensor frames;  // T×D
    double fps = 30.0;
    FeatureLayout layout = FeatureLayout::raw;

    std::size_t length() const { return frames.rows(); }
    std::size_t dim() const { return frames.cols(); }

    void validate() const {
        if (frames.rank() != 2 || length() < 2 || dim() < 1)
            throw Error(ErrorKind::data,
                        "motion sequence needs T>=2 and D>=1, got " +
                            frames.shape_string());
        if (!(fps > 0.0))
            throw Error(ErrorKind::data, "motion sequence fps must be > 0");
        if (!frames.all_finite())
            throw Error(ErrorKind::data, "motion sequence has non-finite values");
    }
};

// Normalized query time: frame k of a T-frame sequence sits at k/(T-1).
// Values outside [0,1] are legal only in extrapolation mode.
using TemporalCoordinate = double;

// round-half-away-from-zero, pinned for reproducible stride arithmetic
inline long long round_half_away(double x) { return std::llround(x); }

inline MotionSequence downsample(const MotionSequence& seq, double factor) {
    seq.validate();
    if (factor < 1.0)
        throw Error(ErrorKind::config, "downsample factor must be >= 1");
    const std::size_t T = seq.length(), D = seq.dim();
    std::vector<std::size_t> kept;
    for (std::size_t k = 0;; ++k) {
        long long src = round_half_away(double(k) * factor);
        if (src < 0 || std::size_t(src) >= T) break;
        kept.push_back(std::size_t(src));
    }
    if (kept.size() < 2)
        throw Error(ErrorKind::data, "downsample: fewer than 2 frames remain");
    MotionSequence out;
    out.frames = Tensor({kept.size(), D});
    for (std::size_t k = 0; k < kept.size(); ++k)
        std::copy(seq.frames.data() + kept[k] * D,
                  seq.frames.data() + (kept[k] + 1) * D,
                  out.frames.data() + k * D);
    out.fps = seq.fps / factor;
    out.layout = seq.layout;
    return out;
}

// N frames on a stride-2^(s-1) grid centered at the frame nearest t, plus
// the grid's relative offsets in normalized time. Out-of-range slots clamp
// to the boundary; offsets always follow the ideal (unclamped) grid.
struct Clip {
    Tensor frames;                 // N×D
    std::vector<double> offsets;   // N, (grid time - t)
};

struct GapMask {
    std::size_t begin = 0, end = 0;  // half-open masked frame range
    bool active() const { return end > begin; }
    bool contains(long long i) const {
        return i >= 0 && std::size_t(i) >= begin && std::size_t(i) < end;
    }
};

inline Clip extract_clip(const MotionSequence& seq, TemporalCoordinate t,
                         int scale, int frames_per_clip,
                         const GapMask* mask = nullptr) {
    seq.validate();
    const long long T = (long long)seq.length();
    const std::size_t D = seq.dim();
    const long long stride = 1LL << (scale - 1);
    const long long center = round_half_away(t * double(T - 1));
    const int N = frames_per_clip;

    Clip clip;
    clip.frames = Tensor({std::size_t(N), D});
    clip.offsets.resize(std::size_t(N));
    for (int j = 0; j < N; ++j) {
        long long ideal = center + (j - (N - 1) / 2) * stride;
        clip.offsets[std::size_t(j)] =
            double(ideal) / double(T - 1) - t;
        long long idx = std::clamp(ideal, 0LL, T - 1);
        if (mask && mask->active() && mask->contains(idx)) {
            // masked frames never enter clips; gap edges act as boundaries
            long long left = (long long)mask->begin - 1;
            long long right = (long long)mask->end;
            bool left_ok = left >= 0, right_ok = right < T;
            if (left_ok && right_ok)
                idx = (idx - left) <= (right - idx) ? left : right;
            else if (left_ok)
                idx = left;
            else if (right_ok)
                idx = right;
            else
                throw Error(ErrorKind::data, "gap mask covers whole sequence");
        }
        std::copy(seq.frames.data() + std::size_t(idx) * D,
                  seq.frames.data() + (std::size_t(idx) + 1) * D,
                  clip.frames.data() + std::size_t(j) * D);
    }
    return clip;
}

// ---- binary sequence format -------------------------------------------
// magic "PAHM", u32 version, u64 T, u64 D, f64 fps, u32 layout,
// then T*D row-major f64, all little-endian.

namespace motion_io {

inline constexpr char kMagic[4] = {'P', 'A', 'H', 'M'};
inline constexpr std::uint32_t kVersion = 1;

inline void save(const std::string& path, const MotionSequence& seq) {
    seq.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::data, "cannot open for write: " + path);
    os.write(kMagic, 4);
    std::uint32_t v = kVersion;
    os.write(reinterpret_cast<const char*>(&v), 4);
    std::uint64_t T = seq.length(), D = seq.dim();
    os.write(reinterpret_cast<const char*>(&T), 8);
    os.write(reinterpret_cast<const char*>(&D), 8);
    os.write(reinterpret_cast<const char*>(&seq.fps), 8);
    std::uint32_t layout = std::uint32_t(seq.layout);
    os.write(reinterpret_cast<const char*>(&layout), 4);
    os.write(reinterpret_cast<const char*>(seq.frames.data()),
             std::streamsize(T * D * sizeof(double)));
    if (!os) throw Error(ErrorKind::data, "write failed: " + path);
}

inline MotionSequence load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::data, "cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw Error(ErrorKind::data, "not a motion file: " + path);
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (v != kVersion)
        throw Error(ErrorKind::data, "unsupported motion file version");
    std::uint64_t T = 0, D = 0;
    double fps = 0;
    std::uint32_t layout = 0;
    is.read(reinterpret_cast<char*>(&T), 8);
    is.read(reinterpret_cast<char*>(&D), 8);
    is.read(reinterpret_cast<char*>(&fps), 8);
    is.read(reinterpret_cast<char*>(&layout), 4);
    if (!is) throw Error(ErrorKind::data, "truncated motion file: " + path);
    MotionSequence seq;
    seq.frames = Tensor({std::size_t(T), std::size_t(D)});
    seq.fps = fps;
    seq.layout = FeatureLayout(layout);
    is.read(reinterpret_cast<char*>(seq.frames.data()),
            std::streamsize(T * D * sizeof(double)));
    if (!is) throw Error(ErrorKind::data, "truncated motion file: " + path);
    seq.validate();
    return seq;
}

inline void save_csv(const std::string& path, const MotionSequence& seq) {
    seq.validate();
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::data, "cannot open for write: " + path);
    os << "frame,time";
    for (std::size_t j = 0; j < seq.dim(); ++j) os << ",c" << j;
    os << "\n";
    char buf[32];
    for (std::size_t i = 0; i < seq.length(); ++i) {
        os << i;
        std::snprintf(buf, sizeof buf, "%.9g", double(i) / seq.fps);
        os << "," << buf;
        for (std::size_t j = 0; j < seq.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", seq.frames(i, j));
            os << "," << buf;
        }
        os << "\n";
    }
}

}  // namespace motion_io
}  // namespace pahires
