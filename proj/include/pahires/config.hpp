#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "pahires/error.hpp"
#include "pahires/loss.hpp"
#include "pahires/model.hpp"
#include "pahires/train.hpp"

namespace pahires {

// Everything a run needs; every field defaults to the training protocol's
// standard value, so an empty config file is valid.
struct RunConfig {
    ModelConfig model;
    TrainConfig train;
    LossConfig loss;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error(ErrorKind::config,
                    "config: bad numeric value for " + key + ": '" + v + "'");
    }
}

inline int to_int(const std::string& key, const std::string& v) {
    double x = to_double(key, v);
    if (x != double(int(x)))
        throw Error(ErrorKind::config,
                    "config: expected integer for " + key + ": '" + v + "'");
    return int(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorKind::config,
                "config: expected boolean for " + key + ": '" + v + "'");
}

}  // namespace config_detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
    using namespace config_detail;
    if (key == "learning_rate") cfg.train.learning_rate = to_double(key, value);
    else if (key == "batch_size") cfg.train.batch_size = to_int(key, value);
    else if (key == "epochs") cfg.train.epochs = to_int(key, value);
    else if (key == "decay_factor") cfg.train.decay_factor = to_double(key, value);
    else if (key == "decay_every") cfg.train.decay_every = to_int(key, value);
    else if (key == "factor_min") cfg.train.factor_min = to_double(key, value);
    else if (key == "factor_max") cfg.train.factor_max = to_double(key, value);
    else if (key == "seed") {
        cfg.train.seed = std::uint64_t(to_double(key, value));
        cfg.model.seed = cfg.train.seed;
    }
    else if (key == "steps_per_epoch") cfg.train.steps_per_epoch = to_int(key, value);
    else if (key == "checkpoint_every") cfg.train.checkpoint_every = to_int(key, value);
    else if (key == "lambda") cfg.loss.lambda = to_double(key, value);
    else if (key == "scales") cfg.model.scales = to_int(key, value);
    else if (key == "harmonics") cfg.model.harmonics = to_int(key, value);
    else if (key == "latent_width") cfg.model.latent_width = to_int(key, value);
    else if (key == "token_dim") cfg.model.token_dim = to_int(key, value);
    else if (key == "clip_frames") cfg.model.clip_frames = to_int(key, value);
    else if (key == "encoder_hidden") cfg.model.encoder_hidden = to_int(key, value);
    else if (key == "decoder_hidden") cfg.model.decoder_hidden = to_int(key, value);
    else if (key == "decoder_layers") cfg.model.decoder_layers = to_int(key, value);
    else if (key == "shared_activation") cfg.model.shared_activation = to_bool(key, value);
    else if (key == "omega0_first") cfg.model.omega0_first = to_double(key, value);
    else if (key == "omega0_hidden") cfg.model.omega0_hidden = to_double(key, value);
    else
        throw Error(ErrorKind::config, "config: unknown key '" + key + "'");
}

// key = value lines; '#' starts a comment; blank lines ignored
inline RunConfig load_config(std::istream& is, RunConfig base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::config,
                        "config line " + std::to_string(lineno) +
                            ": expected key = value");
        apply_config_entry(base, config_detail::trim(line.substr(0, eq)),
                           config_detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline RunConfig load_config_file(const std::string& path,
                                  RunConfig base = {}) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::config, "cannot open config: " + path);
    return load_config(is, std::move(base));
}

}  // namespace pahires
