#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pahires/pahires.hpp"

namespace fs = std::filesystem;
using namespace pahires;

namespace {

struct LoadedSequence {
    MotionSequence seq;
    std::optional<Skeleton> skeleton;  // present when loaded from BVH
};

LoadedSequence load_sequence(const std::string& path) {
    LoadedSequence out;
    if (fs::path(path).extension() == ".bvh") {
        std::ifstream is(path);
        if (!is) throw Error(ErrorKind::data, "cannot open: " + path);
        BvhFile file = parse_bvh(is);
        out.seq = std::move(file.motion);
        out.skeleton = std::move(file.skeleton);
    } else {
        out.seq = motion_io::load(path);
    }
    return out;
}

void save_sequence(const std::string& path, const std::string& format,
                   const MotionSequence& seq,
                   const std::optional<Skeleton>& skeleton) {
    if (format == "bin") {
        motion_io::save(path, seq);
    } else if (format == "csv") {
        motion_io::save_csv(path, seq);
    } else if (format == "bvh") {
        if (!skeleton)
            throw Error(ErrorKind::config,
                        "bvh output requires a bvh input sequence");
        BvhFile file{*skeleton, seq};
        std::ofstream os(path);
        if (!os) throw Error(ErrorKind::data, "cannot open for write: " + path);
        serialize_bvh(os, file);
    } else {
        throw Error(ErrorKind::config, "unknown output format: " + format);
    }
}

std::vector<std::string> collect_data_files(const std::string& data) {
    std::vector<std::string> files;
    if (fs::is_directory(data)) {
        for (const auto& e : fs::directory_iterator(data)) {
            auto ext = e.path().extension();
            if (ext == ".bvh" || ext == ".bin")
                files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(data);
    }
    if (files.empty())
        throw Error(ErrorKind::data, "no .bvh or .bin files under " + data);
    return files;
}

std::pair<std::size_t, std::size_t> parse_pair(const std::string& s,
                                               const char* what) {
    std::size_t comma = s.find(',');
    if (comma == std::string::npos)
        throw Error(ErrorKind::config,
                    std::string(what) + ": expected START,LEN, got '" + s + "'");
    try {
        return {std::stoul(s.substr(0, comma)), std::stoul(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorKind::config,
                    std::string(what) + ": bad value '" + s + "'");
    }
}

std::pair<double, double> parse_range(const std::string& s) {
    std::size_t comma = s.find(',');
    if (comma == std::string::npos)
        throw Error(ErrorKind::config,
                    "--range: expected TMIN,TMAX, got '" + s + "'");
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, "--range: bad value '" + s + "'");
    }
}

int run(int argc, char** argv) {
    CLI::App app{"PA-HiRes: continuous implicit representation of motion "
                 "sequences"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, data_path, in_path, out_path;
    std::string format = "bin", gap_arg, range_arg, scales_arg = "2,3,4,5";
    double scale = 2.0, out_fps = 0.0;
    std::size_t count = 0;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--seed", seed, "RNG seed override");
    };
    auto add_model_io = [&](CLI::App* cmd) {
        cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")
            ->required();
        cmd->add_option("--in", in_path, "input sequence (.bvh or .bin)")
            ->required();
        cmd->add_option("--out", out_path, "output path")->required();
        cmd->add_option("--format", format, "output format: bvh, bin, csv")
            ->check(CLI::IsMember({"bvh", "bin", "csv"}));
    };

    auto* train_cmd = app.add_subcommand("train", "fit a model to a pool of sequences");
    add_common(train_cmd);
    train_cmd->add_option("--data", data_path, "sequence file or directory")
        ->required();
    train_cmd->add_option("--out", out_path, "checkpoint output path")
        ->required();

    auto* interp_cmd = app.add_subcommand("interpolate", "resample at an arbitrary scale");
    add_common(interp_cmd);
    add_model_io(interp_cmd);
    interp_cmd->add_option("--scale", scale, "frame-rate scale (> 0)");

    auto* inb_cmd = app.add_subcommand("inbetween", "fill a masked interior gap");
    add_common(inb_cmd);
    add_model_io(inb_cmd);
    inb_cmd->add_option("--gap", gap_arg, "gap as START,LEN (frames)")
        ->required();

    auto* ext_cmd = app.add_subcommand("extrapolate", "query outside the observed span");
    add_common(ext_cmd);
    add_model_io(ext_cmd);
    ext_cmd->add_option("--range", range_arg, "normalized range TMIN,TMAX")
        ->required();
    ext_cmd->add_option("--count", count, "number of output frames")
        ->required();

    auto* eval_cmd = app.add_subcommand("evaluate", "degrade, reconstruct, and score");
    add_common(eval_cmd);
    eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")
        ->required();
    eval_cmd->add_option("--data", data_path, "sequence file or directory")
        ->required();
    eval_cmd->add_option("--scales", scales_arg, "comma-separated scale list");
    eval_cmd->add_option("--out", out_path, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    (void)out_fps;

    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    if (seed) {
        cfg.train.seed = *seed;
        cfg.model.seed = *seed;
    }

    if (train_cmd->parsed()) {
        std::vector<MotionSequence> pool;
        for (const std::string& f : collect_data_files(data_path)) {
            try {
                pool.push_back(load_sequence(f).seq);
            } catch (const Error& e) {
                std::cerr << "warning: skipping " << f << ": " << e.what()
                          << "\n";
            }
        }
        if (pool.empty())
            throw Error(ErrorKind::data, "no readable sequences in " + data_path);
        cfg.model.feature_dim = int(pool.front().dim());
        Model model = make_model(cfg.model);
        cfg.train.checkpoint_path = out_path;
        if (cfg.train.history_path.empty())
            cfg.train.history_path = out_path + ".history.csv";
        TrainResult result = train(model, pool, cfg.train, cfg.loss);
        std::cout << "trained " << result.steps << " steps over "
                  << cfg.train.epochs << " epochs; checkpoint at " << out_path
                  << "\n";
        if (!result.history.empty())
            std::cout << "final loss (per-element): "
                      << result.history.back().total << "\n";
        return 0;
    }

    Model model = load_model(checkpoint_path);

    if (eval_cmd->parsed()) {
        std::vector<std::pair<std::string, MotionSequence>> data;
        std::size_t skipped = 0;
        for (const std::string& f : collect_data_files(data_path)) {
            try {
                data.emplace_back(fs::path(f).filename().string(),
                                  load_sequence(f).seq);
            } catch (const Error& e) {
                std::cerr << "warning: skipping " << f << ": " << e.what()
                          << "\n";
                ++skipped;
            }
        }
        if (data.empty())
            throw Error(ErrorKind::data,
                        "all " + std::to_string(skipped) + " inputs unreadable");
        std::vector<double> scales;
        std::stringstream ss(scales_arg);
        std::string tok;
        while (std::getline(ss, tok, ','))
            scales.push_back(config_detail::to_double("--scales", tok));
        EvalReport report = evaluate(model, data, scales);
        if (!out_path.empty()) {
            std::ofstream os(out_path);
            if (!os)
                throw Error(ErrorKind::data, "cannot open for write: " + out_path);
            write_eval_csv(os, report);
        }
        write_eval_table(std::cout, report);
        return 0;
    }

    LoadedSequence input = load_sequence(in_path);
    MotionSequence result;
    if (interp_cmd->parsed()) {
        result = interpolate(model, input.seq, scale);
    } else if (inb_cmd->parsed()) {
        auto [start, len] = parse_pair(gap_arg, "--gap");
        result = inbetween(model, input.seq, GapSpec{start, len});
    } else {
        auto [tmin, tmax] = parse_range(range_arg);
        result = extrapolate(model, input.seq, tmin, tmax, count);
    }
    save_sequence(out_path, format, result, input.skeleton);
    std::cout << "wrote " << result.length() << " frames (" << result.dim()
              << " features, " << result.fps << " fps) to " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
