#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "pahires/bvh.hpp"
#include "pahires/error.hpp"

namespace pahires {

struct Quaternion {
    double w = 1, x = 0, y = 0, z = 0;

    static Quaternion axis_angle_deg(int axis, double degrees) {
        double half = degrees * M_PI / 180.0 * 0.5;
        Quaternion q;
        q.w = std::cos(half);
        double s = std::sin(half);
        if (axis == 0) q.x = s;
        else if (axis == 1) q.y = s;
        else q.z = s;
        return q;
    }

    Quaternion operator*(const Quaternion& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quaternion normalized() const {
        double n = norm();
        return {w / n, x / n, y / n, z / n};
    }

    // hemisphere fix: nonnegative scalar part
    Quaternion canonical() const {
        return w < 0 ? Quaternion{-w, -x, -y, -z} : *this;
    }

    std::array<double, 3> rotate(const std::array<double, 3>& v) const {
        // q v q^-1 via the cross-product expansion
        double tx = 2 * (y * v[2] - z * v[1]);
        double ty = 2 * (z * v[0] - x * v[2]);
        double tz = 2 * (x * v[1] - y * v[0]);
        return {v[0] + w * tx + (y * tz - z * ty),
                v[1] + w * ty + (z * tx - x * tz),
                v[2] + w * tz + (x * ty - y * tx)};
    }
};

// Per-joint local rotations plus root translation, the input to FK.
struct Pose {
    std::array<double, 3> root_translation{0, 0, 0};
    std::vector<Quaternion> rotations;  // one per joint, skeleton order
};

struct FkResult {
    std::vector<std::array<double, 3>> positions;  // J×3, global
    std::vector<Quaternion> rotations;             // J unit quaternions, w>=0
};

// Build a Pose from one motion row of a BVH-style sequence. Rotation
// channels compose in declared order; position channels on the root feed
// the translation.
inline Pose pose_from_frame(const Skeleton& skel,
                            const std::vector<double>& row) {
    JointFrame jf = features_to_frame(skel, row);
    Pose pose;
    pose.rotations.resize(skel.joint_count());
    for (std::size_t i = 0; i < skel.joint_count(); ++i) {
        Quaternion q;
        const Joint& joint = skel.joints[i];
        for (std::size_t c = 0; c < joint.channels.size(); ++c) {
            double v = jf.channels[i][c];
            switch (joint.channels[c]) {
                case ChannelKind::Xrotation:
                    q = q * Quaternion::axis_angle_deg(0, v);
                    break;
                case ChannelKind::Yrotation:
                    q = q * Quaternion::axis_angle_deg(1, v);
                    break;
                case ChannelKind::Zrotation:
                    q = q * Quaternion::axis_angle_deg(2, v);
                    break;
                case ChannelKind::Xposition:
                    if (i == 0) pose.root_translation[0] = v;
                    break;
                case ChannelKind::Yposition:
                    if (i == 0) pose.root_translation[1] = v;
                    break;
                case ChannelKind::Zposition:
                    if (i == 0) pose.root_translation[2] = v;
                    break;
            }
        }
        pose.rotations[i] = q;
    }
    return pose;
}

inline FkResult forward_kinematics(const Skeleton& skel, const Pose& pose) {
    skel.validate();
    if (pose.rotations.size() != skel.joint_count())
        throw Error(ErrorKind::data, "pose joint count does not match skeleton");
    for (const Quaternion& q : pose.rotations)
        if (std::abs(q.norm() - 1.0) > 1e-6)
            throw Error(ErrorKind::data,
                        "non-unit quaternion in pose (norm " +
                            std::to_string(q.norm()) + ")");

    FkResult out;
    out.positions.resize(skel.joint_count());
    out.rotations.resize(skel.joint_count());
    for (std::size_t i = 0; i < skel.joint_count(); ++i) {
        const Joint& j = skel.joints[i];
        if (j.parent < 0) {
            out.rotations[i] = pose.rotations[i];
            for (int k = 0; k < 3; ++k)
                out.positions[i][std::size_t(k)] =
                    j.offset[std::size_t(k)] +
                    pose.root_translation[std::size_t(k)];
        } else {
            const Quaternion& pr = out.rotations[std::size_t(j.parent)];
            const auto& pp = out.positions[std::size_t(j.parent)];
            auto off = pr.rotate(j.offset);
            for (int k = 0; k < 3; ++k)
                out.positions[i][std::size_t(k)] = pp[std::size_t(k)] + off[std::size_t(k)];
            out.rotations[i] = pr * pose.rotations[i];
        }
    }
    for (Quaternion& q : out.rotations)
        q = q.normalized().canonical();
    return out;
}

}  // namespace pahires
