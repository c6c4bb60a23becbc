#pragma once

#include <array>
#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pahires/error.hpp"
#include "pahires/motion.hpp"

namespace pahires {

enum class ChannelKind { Xposition, Yposition, Zposition,
                         Xrotation, Yrotation, Zrotation };

inline const char* channel_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::Xposition: return "Xposition";
        case ChannelKind::Yposition: return "Yposition";
        case ChannelKind::Zposition: return "Zposition";
        case ChannelKind::Xrotation: return "Xrotation";
        case ChannelKind::Yrotation: return "Yrotation";
        case ChannelKind::Zrotation: return "Zrotation";
    }
    return "?";
}

struct Joint {
    std::string name;
    int parent = -1;  // -1 for root; parents precede children
    std::array<double, 3> offset{0, 0, 0};
    std::vector<ChannelKind> channels;
    bool has_end_site = false;
    std::array<double, 3> end_site{0, 0, 0};
};

struct Skeleton {
    std::vector<Joint> joints;  // topological order, joints[0] is the root

    std::size_t joint_count() const { return joints.size(); }

    std::size_t channel_count() const {
        std::size_t n = 0;
        for (const Joint& j : joints) n += j.channels.size();
        return n;
    }

    // offset of each joint's channel block within a motion row
    std::vector<std::size_t> channel_offsets() const {
        std::vector<std::size_t> off;
        std::size_t n = 0;
        for (const Joint& j : joints) {
            off.push_back(n);
            n += j.channels.size();
        }
        return off;
    }

    void validate() const {
        if (joints.empty())
            throw Error(ErrorKind::data, "skeleton has no joints");
        if (joints[0].parent != -1)
            throw Error(ErrorKind::data, "skeleton root must have no parent");
        for (std::size_t i = 1; i < joints.size(); ++i)
            if (joints[i].parent < 0 || std::size_t(joints[i].parent) >= i)
                throw Error(ErrorKind::data,
                            "skeleton joints not in topological order");
    }
};

struct BvhFile {
    Skeleton skeleton;
    MotionSequence motion;  // rows are channel values in hierarchy order
};

namespace bvh_detail {

// whitespace-delimited tokens with line tracking for error messages
class Lexer {
public:
    explicit Lexer(std::istream& is) : is_(is) {}

    bool next(std::string& tok) {
        tok.clear();
        int c;
        while ((c = is_.get()) != EOF) {
            if (c == '\n') {
                ++line_;
                if (!tok.empty()) return true;
            } else if (std::isspace(c)) {
                if (!tok.empty()) return true;
            } else {
                tok.push_back(char(c));
            }
        }
        return !tok.empty();
    }

    std::string expect() {
        std::string tok;
        if (!next(tok)) fail("unexpected end of file");
        return tok;
    }

    void expect(const std::string& want) {
        std::string tok = expect();
        if (tok != want)
            fail("expected '" + want + "', got '" + tok + "'");
    }

    double number() {
        std::string tok = expect();
        try {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            fail("expected a number, got '" + tok + "'");
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::data,
                    "BVH line " + std::to_string(line_) + ": " + msg);
    }

    int line() const { return line_; }

private:
    std::istream& is_;
    int line_ = 1;
};

inline ChannelKind parse_channel(Lexer& lex, const std::string& tok) {
    if (tok == "Xposition") return ChannelKind::Xposition;
    if (tok == "Yposition") return ChannelKind::Yposition;
    if (tok == "Zposition") return ChannelKind::Zposition;
    if (tok == "Xrotation") return ChannelKind::Xrotation;
    if (tok == "Yrotation") return ChannelKind::Yrotation;
    if (tok == "Zrotation") return ChannelKind::Zrotation;
    lex.fail("unknown channel '" + tok + "'");
}

inline void parse_joint_body(Lexer& lex, Skeleton& skel, int index) {
    lex.expect("{");
    lex.expect("OFFSET");
    for (double& v : skel.joints[std::size_t(index)].offset) v = lex.number();
    std::string tok = lex.expect();
    if (tok == "CHANNELS") {
        int n = int(lex.number());
        if (n < 0 || n > 6) lex.fail("channel count out of range");
        for (int i = 0; i < n; ++i)
            skel.joints[std::size_t(index)].channels.push_back(
                parse_channel(lex, lex.expect()));
        tok = lex.expect();
    }
    while (tok != "}") {
        if (tok == "JOINT") {
            Joint child;
            child.name = lex.expect();
            child.parent = index;
            skel.joints.push_back(child);
            parse_joint_body(lex, skel, int(skel.joints.size()) - 1);
        } else if (tok == "End") {
            lex.expect("Site");
            lex.expect("{");
            lex.expect("OFFSET");
            Joint& j = skel.joints[std::size_t(index)];
            j.has_end_site = true;
            for (double& v : j.end_site) v = lex.number();
            lex.expect("}");
        } else {
            lex.fail("expected JOINT, End Site, or '}', got '" + tok + "'");
        }
        tok = lex.expect();
    }
}

}  // namespace bvh_detail

inline BvhFile parse_bvh(std::istream& is) {
    bvh_detail::Lexer lex(is);
    lex.expect("HIERARCHY");
    lex.expect("ROOT");

    BvhFile file;
    Joint root;
    root.name = lex.expect();
    root.parent = -1;
    file.skeleton.joints.push_back(root);
    bvh_detail::parse_joint_body(lex, file.skeleton, 0);
    file.skeleton.validate();

    lex.expect("MOTION");
    lex.expect("Frames:");
    long frames = long(lex.number());
    if (frames < 2) lex.fail("need at least 2 motion frames");
    lex.expect("Frame");
    lex.expect("Time:");
    double frame_time = lex.number();
    if (!(frame_time > 0)) lex.fail("frame time must be positive");

    std::size_t D = file.skeleton.channel_count();
    if (D == 0) lex.fail("skeleton declares no channels");
    file.motion.frames = Tensor({std::size_t(frames), D});
    for (long f = 0; f < frames; ++f)
        for (std::size_t c = 0; c < D; ++c)
            file.motion.frames(std::size_t(f), c) = lex.number();
    std::string extra;
    if (lex.next(extra))
        lex.fail("trailing data after motion rows: '" + extra + "'");

    file.motion.fps = 1.0 / frame_time;
    file.motion.layout = FeatureLayout::joint_euler;
    file.motion.validate();
    return file;
}

inline BvhFile parse_bvh(const std::string& text) {
    std::istringstream is(text);
    return parse_bvh(is);
}

namespace bvh_detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

inline void write_joint(std::ostream& os, const Skeleton& skel,
                        std::size_t index, int depth) {
    const Joint& j = skel.joints[index];
    std::string ind(std::size_t(depth) * 2, ' ');
    os << ind << (depth == 0 ? "ROOT " : "JOINT ") << j.name << "\n"
       << ind << "{\n";
    std::string ind2(std::size_t(depth + 1) * 2, ' ');
    os << ind2 << "OFFSET " << fmt(j.offset[0]) << " " << fmt(j.offset[1])
       << " " << fmt(j.offset[2]) << "\n";
    if (!j.channels.empty()) {
        os << ind2 << "CHANNELS " << j.channels.size();
        for (ChannelKind c : j.channels) os << " " << channel_name(c);
        os << "\n";
    }
    for (std::size_t k = index + 1; k < skel.joints.size(); ++k)
        if (skel.joints[k].parent == int(index))
            write_joint(os, skel, k, depth + 1);
    if (j.has_end_site) {
        os << ind2 << "End Site\n" << ind2 << "{\n";
        os << std::string(std::size_t(depth + 2) * 2, ' ') << "OFFSET "
           << fmt(j.end_site[0]) << " " << fmt(j.end_site[1]) << " "
           << fmt(j.end_site[2]) << "\n";
        os << ind2 << "}\n";
    }
    os << ind << "}\n";
}

}  // namespace bvh_detail

inline void serialize_bvh(std::ostream& os, const BvhFile& file) {
    file.skeleton.validate();
    file.motion.validate();
    if (file.motion.dim() != file.skeleton.channel_count())
        throw Error(ErrorKind::data,
                    "motion row width does not match skeleton channels");
    os << "HIERARCHY\n";
    bvh_detail::write_joint(os, file.skeleton, 0, 0);
    os << "MOTION\n";
    os << "Frames: " << file.motion.length() << "\n";
    os << "Frame Time: " << bvh_detail::fmt(1.0 / file.motion.fps) << "\n";
    for (std::size_t f = 0; f < file.motion.length(); ++f) {
        for (std::size_t c = 0; c < file.motion.dim(); ++c)
            os << (c ? " " : "") << bvh_detail::fmt(file.motion.frames(f, c));
        os << "\n";
    }
}

inline std::string serialize_bvh(const BvhFile& file) {
    std::ostringstream os;
    serialize_bvh(os, file);
    return os.str();
}

// ---- feature-vector <-> per-joint layout bridge ------------------------

// Per-joint view of one motion row: channel values grouped by joint, in the
// skeleton's declared channel order.
struct JointFrame {
    std::vector<std::vector<double>> channels;  // per joint
};

inline JointFrame features_to_frame(const Skeleton& skel,
                                    const std::vector<double>& row) {
    if (row.size() != skel.channel_count())
        throw Error(ErrorKind::data,
                    "feature row width " + std::to_string(row.size()) +
                        " does not match skeleton channel count " +
                        std::to_string(skel.channel_count()));
    JointFrame frame;
    std::size_t pos = 0;
    for (const Joint& j : skel.joints) {
        frame.channels.emplace_back(row.begin() + long(pos),
                                    row.begin() + long(pos + j.channels.size()));
        pos += j.channels.size();
    }
    return frame;
}

inline std::vector<double> frame_to_features(const Skeleton& skel,
                                             const JointFrame& frame) {
    if (frame.channels.size() != skel.joint_count())
        throw Error(ErrorKind::data, "joint frame does not match skeleton");
    std::vector<double> row;
    for (std::size_t i = 0; i < skel.joints.size(); ++i) {
        if (frame.channels[i].size() != skel.joints[i].channels.size())
            throw Error(ErrorKind::data,
                        "channel count mismatch at joint " +
                            skel.joints[i].name);
        row.insert(row.end(), frame.channels[i].begin(),
                   frame.channels[i].end());
    }
    return row;
}

}  // namespace pahires
