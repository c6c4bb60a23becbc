#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "pahires/checkpoint.hpp"
#include "pahires/error.hpp"
#include "pahires/graph.hpp"
#include "pahires/motion.hpp"

namespace pahires {

struct ModelConfig {
    int scales = 3;            // S
    int harmonics = 16;        // zeta
    int latent_width = 128;    // L
    int token_dim = 16;        // d, attention token width
    int clip_frames = 5;       // N_s
    int encoder_hidden = 128;
    int decoder_hidden = 256;
    int decoder_layers = 5;
    int feature_dim = 0;       // D, taken from data
    bool shared_activation = false;
    std::uint64_t seed = 0;
    // The encoders see feature values rather than raw coordinates, so the
    // first-layer frequency base stays modest; coordinate-only MLPs built
    // from MlpSpec directly default to a higher base instead.
    double omega0_first = 1.0;
    double omega0_hidden = 1.0;

    int tokens() const { return latent_width / token_dim; }

    void validate() const {
        if (scales < 1) throw Error(ErrorKind::config, "scales must be >= 1");
        if (harmonics < 1)
            throw Error(ErrorKind::config, "harmonics must be >= 1");
        if (latent_width < 1 || token_dim < 1 ||
            latent_width % token_dim != 0)
            throw Error(ErrorKind::config,
                        "latent_width must be a positive multiple of token_dim");
        if (clip_frames < 1 || clip_frames % 2 == 0)
            throw Error(ErrorKind::config, "clip_frames must be odd and >= 1");
        if (decoder_layers < 2)
            throw Error(ErrorKind::config, "decoder_layers must be >= 2");
        if (feature_dim < 1)
            throw Error(ErrorKind::config, "feature_dim must be set from data");
    }

    nlohmann::json to_json() const {
        return {{"scales", scales},
                {"harmonics", harmonics},
                {"latent_width", latent_width},
                {"token_dim", token_dim},
                {"clip_frames", clip_frames},
                {"encoder_hidden", encoder_hidden},
                {"decoder_hidden", decoder_hidden},
                {"decoder_layers", decoder_layers},
                {"feature_dim", feature_dim},
                {"shared_activation", shared_activation},
                {"seed", seed},
                {"omega0_first", omega0_first},
                {"omega0_hidden", omega0_hidden}};
    }

    static ModelConfig from_json(const nlohmann::json& j) {
        ModelConfig c;
        c.scales = j.at("scales");
        c.harmonics = j.at("harmonics");
        c.latent_width = j.at("latent_width");
        c.token_dim = j.at("token_dim");
        c.clip_frames = j.at("clip_frames");
        c.encoder_hidden = j.at("encoder_hidden");
        c.decoder_hidden = j.at("decoder_hidden");
        c.decoder_layers = j.at("decoder_layers");
        c.feature_dim = j.at("feature_dim");
        c.shared_activation = j.at("shared_activation");
        c.seed = j.at("seed");
        c.omega0_first = j.at("omega0_first");
        c.omega0_hidden = j.at("omega0_hidden");
        return c;
    }
};

enum class Activation { fourier, relu_baseline };

// One MLP whose hidden layers run through the learnable Fourier activation.
// The final layer is always linear. Parameter names are derived from the
// prefix, e.g. "enc1.w0", "enc1.act0.psi".
struct MlpSpec {
    std::string prefix;
    std::vector<int> dims;  // dims[l] -> dims[l+1] per layer
    bool shared_activation = false;
    int harmonics = 16;
    double omega0_first = 30.0;
    double omega0_hidden = 1.0;
    Activation activation = Activation::fourier;

    int layer_count() const { return int(dims.size()) - 1; }

    std::string weight_name(int l) const {
        return prefix + ".w" + std::to_string(l);
    }
    std::string bias_name(int l) const {
        return prefix + ".b" + std::to_string(l);
    }
    std::string act_name(int l, const char* field) const {
        return shared_activation
                   ? prefix + ".act." + field
                   : prefix + ".act" + std::to_string(l) + "." + field;
    }
};

struct Model {
    ModelConfig config;
    std::map<std::string, Tensor> params;   // trainable
    std::map<std::string, Tensor> buffers;  // feature normalization stats

    std::vector<MlpSpec> encoders;  // E_s, one per scale
    std::vector<MlpSpec> paids;     // F_s, one per scale
    MlpSpec decoder;

    bool normalized() const { return buffers.count("norm.mean") > 0; }
};

namespace init {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Harmonic frequencies, variance-bounded amplitudes, uniform phases.
inline void init_activation(std::map<std::string, Tensor>& params,
                            const MlpSpec& spec, int layer, int fan_in,
                            std::mt19937_64& rng) {
    int z = spec.harmonics;
    double omega0 = layer == 0 ? spec.omega0_first : spec.omega0_hidden;
    Tensor psi({std::size_t(z)}), omega({std::size_t(z)}),
        phi({std::size_t(z)});
    double a = std::sqrt(6.0 / (double(fan_in) * z));
    for (int i = 0; i < z; ++i) {
        omega[std::size_t(i)] = double(i + 1) * omega0;
        phi[std::size_t(i)] = uniform(rng, -M_PI, M_PI);
        psi[std::size_t(i)] = uniform(rng, -a, a);
    }
    params[spec.act_name(layer, "psi")] = std::move(psi);
    params[spec.act_name(layer, "omega")] = std::move(omega);
    params[spec.act_name(layer, "phi")] = std::move(phi);
}

inline void init_mlp(std::map<std::string, Tensor>& params,
                     const MlpSpec& spec, std::mt19937_64& rng) {
    for (int l = 0; l < spec.layer_count(); ++l) {
        int in = spec.dims[std::size_t(l)], out = spec.dims[std::size_t(l) + 1];
        Tensor w({std::size_t(in), std::size_t(out)});
        double b = std::sqrt(6.0 / double(in));
        for (double& v : w.storage()) v = uniform(rng, -b, b);
        params[spec.weight_name(l)] = std::move(w);
        params[spec.bias_name(l)] = Tensor({std::size_t(out)});
        bool activated = l + 1 < spec.layer_count();
        if (activated && spec.activation == Activation::fourier &&
            (!spec.shared_activation || l == 0))
            init_activation(params, spec, l, in, rng);
    }
}

}  // namespace init

inline std::string att_param(int block, const char* field) {
    return "att" + std::to_string(block) + "." + field;
}

inline Model make_model(const ModelConfig& config) {
    config.validate();
    Model m;
    m.config = config;

    const int L = config.latent_width;
    const int N = config.clip_frames;
    const int D = config.feature_dim;
    const int enc_in = N * D + N + 1;  // flattened clip + offsets + t

    std::mt19937_64 rng(config.seed);
    for (int s = 1; s <= config.scales; ++s) {
        MlpSpec enc;
        enc.prefix = "enc" + std::to_string(s);
        enc.dims = {enc_in, config.encoder_hidden, config.encoder_hidden, L};
        enc.shared_activation = config.shared_activation;
        enc.harmonics = config.harmonics;
        enc.omega0_first = config.omega0_first;
        enc.omega0_hidden = config.omega0_hidden;
        m.encoders.push_back(enc);
        init::init_mlp(m.params, enc, rng);

        MlpSpec paid;
        paid.prefix = "paid" + std::to_string(s);
        paid.dims = {L, L, L};
        paid.shared_activation = config.shared_activation;
        paid.harmonics = config.harmonics;
        paid.omega0_first = config.omega0_first;
        paid.omega0_hidden = config.omega0_hidden;
        m.paids.push_back(paid);
        init::init_mlp(m.params, paid, rng);
    }

    const int d = config.token_dim;
    for (int b = 1; b < config.scales; ++b) {
        for (const char* f : {"wq", "wk", "wv"}) {
            Tensor w({std::size_t(d), std::size_t(d)});
            double bound = std::sqrt(6.0 / double(d));
            for (double& v : w.storage()) v = init::uniform(rng, -bound, bound);
            m.params[att_param(b, f)] = std::move(w);
        }
        Tensor wo({std::size_t(L), std::size_t(L)});
        double bound = std::sqrt(6.0 / double(L));
        for (double& v : wo.storage()) v = init::uniform(rng, -bound, bound);
        m.params[att_param(b, "wo")] = std::move(wo);
    }

    MlpSpec dec;
    dec.prefix = "dec";
    dec.dims.push_back(config.scales * L + 1);
    for (int l = 0; l < config.decoder_layers - 1; ++l)
        dec.dims.push_back(config.decoder_hidden);
    dec.dims.push_back(D);
    dec.shared_activation = config.shared_activation;
    dec.harmonics = config.harmonics;
    dec.omega0_first = config.omega0_first;
    dec.omega0_hidden = config.omega0_hidden;
    m.decoder = dec;
    init::init_mlp(m.params, dec, rng);

    return m;
}

// ---- forward-pass builders --------------------------------------------

// sigma(x) = sum_i psi_i * sin(omega_i * x + phi_i), elementwise
inline int fourier_activate(Graph& g, int psi, int omega, int phi, int x) {
    std::size_t z = g.value(psi).size();
    int acc = -1;
    for (std::size_t i = 0; i < z; ++i) {
        int p = g.slice(psi, 0, i, i + 1);
        int w = g.slice(omega, 0, i, i + 1);
        int f = g.slice(phi, 0, i, i + 1);
        int term = g.mul(p, g.sin_(g.add(g.mul(w, x), f)));
        acc = acc < 0 ? term : g.add(acc, term);
    }
    return acc;
}

using ParamIds = std::map<std::string, int>;

inline int mlp_forward(Graph& g, const MlpSpec& spec, const ParamIds& ids,
                       int x) {
    int h = x;
    for (int l = 0; l < spec.layer_count(); ++l) {
        h = g.add(g.matmul(h, ids.at(spec.weight_name(l))),
                  ids.at(spec.bias_name(l)));
        if (l + 1 < spec.layer_count()) {
            if (spec.activation == Activation::relu_baseline) {
                h = g.relu(h);
            } else {
                int al = spec.shared_activation ? 0 : l;
                h = fourier_activate(g, ids.at(spec.act_name(al, "psi")),
                                     ids.at(spec.act_name(al, "omega")),
                                     ids.at(spec.act_name(al, "phi")), h);
            }
        }
    }
    return h;
}

// Single-head scaled dot-product cross attention over P tokens of width d.
// Queries come from the coarser-scale latent, keys/values from the finer
// one; the output projection result is added back onto the value latent.
inline int cross_scale_attention(Graph& g, const ModelConfig& cfg, int block,
                                 const ParamIds& ids, int z_prev, int z_cur) {
    const std::size_t B = g.value(z_cur).shape()[0];
    const std::size_t P = std::size_t(cfg.tokens());
    const std::size_t d = std::size_t(cfg.token_dim);

    int q_tok = g.reshape(z_prev, {B * P, d});
    int kv_tok = g.reshape(z_cur, {B * P, d});
    int Q = g.matmul(q_tok, ids.at(att_param(block, "wq")));
    int K = g.matmul(kv_tok, ids.at(att_param(block, "wk")));
    int V = g.matmul(kv_tok, ids.at(att_param(block, "wv")));

    std::vector<int> rows;
    rows.reserve(B);
    for (std::size_t b = 0; b < B; ++b) {
        int qs = g.slice(Q, 0, b * P, (b + 1) * P);
        int ks = g.slice(K, 0, b * P, (b + 1) * P);
        int vs = g.slice(V, 0, b * P, (b + 1) * P);
        int scores = g.scale(g.matmul(qs, g.transpose(ks)),
                             1.0 / std::sqrt(double(d)));
        int attended = g.matmul(g.softmax(scores), vs);  // P×d
        rows.push_back(attended);
    }
    int out = g.reshape(g.concat(rows, 0), {B, P * d});
    out = g.matmul(out, ids.at(att_param(block, "wo")));
    return g.add(out, z_cur);  // residual
}

struct ForwardPass {
    Graph graph;
    ParamIds ids;
    int output = -1;  // B×D prediction in normalized feature space
};

inline void register_params(Graph& g, const Model& m, bool trainable,
                            ParamIds& ids) {
    for (const auto& [name, t] : m.params)
        ids[name] = trainable ? g.parameter(t, name) : g.input(t, name);
}

// Composition of Eqs: clip extraction -> E_s -> F_s -> cross-scale fusion
// -> decoder, batched over the query coordinates. `seq` must already be in
// normalized feature space.
inline int build_prediction(Graph& g, const Model& m, const ParamIds& ids,
                            const MotionSequence& seq,
                            const std::vector<double>& ts,
                            const GapMask* mask = nullptr) {
    const ModelConfig& cfg = m.config;
    if (int(seq.dim()) != cfg.feature_dim)
        throw Error(ErrorKind::data,
                    "sequence feature dim " + std::to_string(seq.dim()) +
                        " does not match model feature dim " +
                        std::to_string(cfg.feature_dim));
    const std::size_t B = ts.size();
    const std::size_t N = std::size_t(cfg.clip_frames);
    const std::size_t D = std::size_t(cfg.feature_dim);

    // multi-scale encoding: z_s = F_s(E_s(C_s^t, t))
    std::vector<int> latents;
    for (int s = 1; s <= cfg.scales; ++s) {
        Tensor in({B, N * D + N + 1});
        for (std::size_t b = 0; b < B; ++b) {
            Clip clip = extract_clip(seq, ts[b], s, cfg.clip_frames, mask);
            double* row = in.data() + b * (N * D + N + 1);
            std::copy(clip.frames.data(), clip.frames.data() + N * D, row);
            std::copy(clip.offsets.begin(), clip.offsets.end(), row + N * D);
            row[N * D + N] = ts[b];
        }
        int x = g.input(std::move(in), "clip_s" + std::to_string(s));
        int r = mlp_forward(g, m.encoders[std::size_t(s) - 1], ids, x);
        latents.push_back(mlp_forward(g, m.paids[std::size_t(s) - 1], ids, r));
    }

    // top-down progressive fusion; S=1 degenerates to the raw latent
    std::vector<int> fused;
    fused.push_back(latents[0]);
    for (int s = 2; s <= cfg.scales; ++s)
        fused.push_back(cross_scale_attention(
            g, cfg, s - 1, ids, latents[std::size_t(s) - 2],
            latents[std::size_t(s) - 1]));
    int reference = fused.size() == 1 ? fused[0] : g.concat(fused, 1);

    Tensor tcol({B, 1});
    for (std::size_t b = 0; b < B; ++b) tcol(b, 0) = ts[b];
    int dec_in = g.concat({reference, g.input(std::move(tcol), "t")}, 1);
    return mlp_forward(g, m.decoder, ids, dec_in);
}

// ---- normalization -----------------------------------------------------

inline MotionSequence normalize(const Model& m, const MotionSequence& seq) {
    if (!m.normalized()) return seq;
    const Tensor& mean = m.buffers.at("norm.mean");
    const Tensor& std_ = m.buffers.at("norm.std");
    MotionSequence out = seq;
    std::size_t D = seq.dim();
    for (std::size_t i = 0; i < seq.length(); ++i)
        for (std::size_t j = 0; j < D; ++j)
            out.frames(i, j) = (seq.frames(i, j) - mean[j]) / std_[j];
    return out;
}

inline void denormalize_rows(const Model& m, Tensor& rows) {
    if (!m.normalized()) return;
    const Tensor& mean = m.buffers.at("norm.mean");
    const Tensor& std_ = m.buffers.at("norm.std");
    for (std::size_t i = 0; i < rows.rows(); ++i)
        for (std::size_t j = 0; j < rows.cols(); ++j)
            rows(i, j) = rows(i, j) * std_[j] + mean[j];
}

// Pure function of (parameters, seq, ts): the queried frames, denormalized.
inline Tensor predict_frames(const Model& m, const MotionSequence& seq,
                             const std::vector<double>& ts,
                             const GapMask* mask = nullptr) {
    MotionSequence norm = normalize(m, seq);
    Graph g;
    ParamIds ids;
    register_params(g, m, /*trainable=*/false, ids);
    int out = build_prediction(g, m, ids, norm, ts, mask);
    Tensor result = g.value(out);
    denormalize_rows(m, result);
    return result;
}

inline std::vector<double> predict_frame(const Model& m,
                                         const MotionSequence& seq,
                                         TemporalCoordinate t) {
    Tensor rows = predict_frames(m, seq, {t});
    return {rows.data(), rows.data() + rows.size()};
}

// ---- checkpoint --------------------------------------------------------

inline void save_model(const std::string& path, const Model& m) {
    std::map<std::string, Tensor> records = m.params;
    for (const auto& [name, t] : m.buffers) records[name] = t;
    checkpoint::save(path, records, m.config.to_json().dump());
}

inline Model load_model(const std::string& path) {
    std::string meta;
    auto records = checkpoint::load(path, &meta);
    ModelConfig cfg;
    try {
        cfg = ModelConfig::from_json(nlohmann::json::parse(meta));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::data,
                    std::string("checkpoint: bad architecture descriptor: ") +
                        e.what());
    }
    Model skeleton = make_model(cfg);
    Model m;
    m.config = cfg;
    m.encoders = skeleton.encoders;
    m.paids = skeleton.paids;
    m.decoder = skeleton.decoder;
    for (auto& [name, t] : records) {
        if (name.rfind("norm.", 0) == 0) {
            m.buffers[name] = std::move(t);
        } else {
            auto it = skeleton.params.find(name);
            if (it == skeleton.params.end())
                throw Error(ErrorKind::data,
                            "checkpoint: unexpected parameter " + name);
            if (!it->second.same_shape(t))
                throw Error(ErrorKind::data,
                            "checkpoint: shape mismatch for " + name);
            m.params[name] = std::move(t);
        }
    }
    if (m.params.size() != skeleton.params.size())
        throw Error(ErrorKind::data, "checkpoint: missing parameters");
    return m;
}

}  // namespace pahires
