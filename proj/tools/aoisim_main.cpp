// Command-line front end: train / eval / sweep / validate-config.
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoisim/common/config.hpp"
#include "aoisim/marl/checkpoint.hpp"
#include "aoisim/sim/sweep.hpp"
#include "aoisim/sim/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Grid specs come either as "start:step:stop" (inclusive) or as a comma
// list "a,b,c". A single number is a one-point grid.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> values;
    auto parse_num = [](const std::string& s) {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::istringstream ss(text);
        std::string a, b, c;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
            !std::getline(ss, c) || c.find(':') != std::string::npos)
            throw std::invalid_argument("grid spec must be start:step:stop");
        double start = parse_num(a), step = parse_num(b), stop = parse_num(c);
        if (step <= 0.0 || stop < start)
            throw std::invalid_argument("grid spec needs step > 0 and stop >= start");
        for (double v = start; v <= stop + 1e-9 * std::max(1.0, std::abs(stop));
             v += step)
            values.push_back(v);
        return values;
    }
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) values.push_back(parse_num(item));
    if (values.empty()) throw std::invalid_argument("empty grid spec");
    return values;
}

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> episodes;
    std::optional<std::string> out_dir;
    std::optional<std::string> aoi_grid;
    std::optional<std::string> delta_m;
};

aoisim::ScenarioConfig effective_config(const CommonArgs& args) {
    aoisim::ScenarioConfig cfg = args.config_path.empty()
                                     ? aoisim::ScenarioConfig{}
                                     : aoisim::ScenarioConfig::load(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.episodes) cfg.learning.episodes = *args.episodes;
    if (args.out_dir) cfg.out_dir = *args.out_dir;
    if (args.aoi_grid) cfg.traffic.aoi_grid_ms = parse_grid(*args.aoi_grid);
    if (args.delta_m) cfg.traffic.delta_m_vph = parse_grid(*args.delta_m);
    cfg.validate();
    return cfg;
}

std::filesystem::path prepare_out_dir(const aoisim::ScenarioConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    cfg.save((dir / "config.json").string());
    return dir;
}

int cmd_train(const CommonArgs& args) {
    aoisim::ScenarioConfig cfg = effective_config(args);
    auto dir = prepare_out_dir(cfg);
    long total = cfg.learning.episodes;
    auto out = aoisim::sim::train<float>(
        cfg, [total](const aoisim::sim::TrainingRow& r) {
            if (r.episode % 100 == 0 || r.episode + 1 == total)
                std::fprintf(stderr,
                             "episode %ld/%ld  avg_aoi=%.2f ms  avg_reward=%.4f  "
                             "noise=%.3f\n",
                             r.episode + 1, total, r.avg_aoi_ms, r.avg_reward,
                             r.exploration_scale);
        });
    {
        std::ofstream csv(dir / "training.csv");
        if (!csv) throw std::runtime_error("cannot write training.csv");
        aoisim::sim::write_training_csv(csv, out.rows);
    }
    aoisim::marl::save_checkpoint((dir / "checkpoint.bin").string(), out.trainer,
                                  out.final_noise_scale);
    std::cout << "wrote " << (dir / "training.csv").string() << " and "
              << (dir / "checkpoint.bin").string() << "\n";
    return kExitOk;
}

int cmd_eval(const CommonArgs& args, const std::string& checkpoint_path,
             int eval_episodes) {
    aoisim::ScenarioConfig cfg = effective_config(args);
    auto trainer = aoisim::marl::load_checkpoint<float>(
        checkpoint_path, cfg.trainer_config<float>());
    // The checkpoint dictates the agent population; the world must agree.
    cfg.env.num_vehicles = trainer.config().num_agents;
    cfg.env.channel.num_subchannels = trainer.config().num_subchannels;

    aoisim::Rng master(cfg.seed);
    aoisim::Rng eval_rng = master.substream(404);
    aoisim::sim::RadioEnvironment env(cfg.env, master.substream(505).next_u64());
    auto res = aoisim::sim::evaluate(env, trainer, eval_episodes, eval_rng);

    auto dir = prepare_out_dir(cfg);
    std::ofstream json(dir / "eval.json");
    if (!json) throw std::runtime_error("cannot write eval.json");
    aoisim::sim::write_eval_json(json, res);
    std::cout << "avg_aoi_ms=" << res.avg_aoi_ms << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
    aoisim::ScenarioConfig cfg = effective_config(args);
    auto dir = prepare_out_dir(cfg);
    aoisim::traffic::RoadNetwork net = cfg.traffic.build_network();
    auto result = aoisim::sim::aoi_capacity_sweep(
        net, cfg.traffic.aoi_grid_ms, cfg.traffic.delta_m_vph, cfg.sweep_options());
    {
        std::ofstream csv(dir / "sweep.csv");
        if (!csv) throw std::runtime_error("cannot write sweep.csv");
        aoisim::sim::write_sweep_csv(result, csv);
    }
    for (double dm : aoisim::sim::sweep_delta_m_values(result)) {
        char name[64];
        std::snprintf(name, sizeof name, "sweep_dm%g.dat", dm);
        std::ofstream dat(dir / name);
        if (!dat) throw std::runtime_error("cannot write gnuplot data file");
        aoisim::sim::write_sweep_gnuplot_curve(result, dm, dat);
    }
    std::cout << "wrote " << (dir / "sweep.csv").string() << " and "
              << aoisim::sim::sweep_delta_m_values(result).size()
              << " gnuplot curve files\n";
    return kExitOk;
}

int cmd_validate(const CommonArgs& args) {
    aoisim::ScenarioConfig cfg = effective_config(args);
    std::cout << cfg.to_json().dump(2) << "\n";
    std::cerr << "config OK\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AoI-aware V2I resource management and traffic assignment"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string checkpoint_path = "out/checkpoint.bin";
    int eval_episodes = 20;

    auto add_common = [&](CLI::App* sub, bool with_grid) {
        sub->add_option("--config", args.config_path, "Scenario config file (JSON)");
        sub->add_option("--seed", args.seed, "Master seed override");
        sub->add_option("--episodes", args.episodes, "Episode count override");
        sub->add_option("--out-dir", args.out_dir, "Output directory override");
        if (with_grid) {
            sub->add_option("--aoi-grid", args.aoi_grid,
                            "AoI grid, start:step:stop or comma list [ms]");
            sub->add_option("--delta-m", args.delta_m,
                            "Capacity deviation values, comma list [veh/h]");
        }
    };

    CLI::App* train = app.add_subcommand("train", "Train the resource manager");
    add_common(train, false);
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a trained checkpoint");
    add_common(eval, false);
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file to load");
    eval->add_option("--eval-episodes", eval_episodes,
                     "Number of noise-free evaluation episodes");
    CLI::App* sweep =
        app.add_subcommand("sweep", "AoI -> capacity error -> assignment sweep");
    add_common(sweep, true);
    CLI::App* validate =
        app.add_subcommand("validate-config", "Check a config and print it");
    add_common(validate, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (train->parsed()) return cmd_train(args);
        if (eval->parsed()) {
            // `eval --episodes N` is the natural spelling from the shell;
            // map it onto the rollout count rather than training length.
            if (args.episodes) {
                eval_episodes = *args.episodes;
                args.episodes.reset();
            }
            return cmd_eval(args, checkpoint_path, eval_episodes);
        }
        if (sweep->parsed()) return cmd_sweep(args);
        if (validate->parsed()) return cmd_validate(args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
