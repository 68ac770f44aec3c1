#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoisim/common/rng.hpp"
#include "aoisim/marl/trainer.hpp"

// Checkpoint layout (native little-endian, parameters stored as float64):
//   magic "AOIC", u32 version
//   i64 episodes_trained, f64 exploration noise scale
//   i32 num_agents, i32 num_subchannels
//   u32 count + i32[] actor hidden widths, same for critic hidden widths
//   4V+4 parameter blocks (actors, actor targets, local critics, local
//   critic targets, twin global critics, twin global targets), each
//   u64 count + f64[].

namespace aoisim::marl {

inline constexpr char kCheckpointMagic[4] = {'A', 'O', 'I', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
    long episodes_trained = 0;
    double noise_scale = 0.0;
    int num_agents = 0;
    int num_subchannels = 0;
};

namespace detail {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated or unreadable");
    return v;
}

inline void write_dims(std::ostream& out, const std::vector<int>& dims) {
    write_pod(out, static_cast<std::uint32_t>(dims.size()));
    for (int d : dims) write_pod(out, static_cast<std::int32_t>(d));
}

inline std::vector<int> read_dims(std::istream& in) {
    auto count = read_pod<std::uint32_t>(in);
    if (count == 0 || count > 64)
        throw std::runtime_error("checkpoint: implausible layer count");
    std::vector<int> dims(count);
    for (auto& d : dims) {
        d = read_pod<std::int32_t>(in);
        if (d < 1) throw std::runtime_error("checkpoint: bad layer width");
    }
    return dims;
}

template <typename Scalar>
void write_params(std::ostream& out, const DenseNetwork<Scalar>& net) {
    const auto& p = net.params();
    write_pod(out, static_cast<std::uint64_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i)
        write_pod(out, static_cast<double>(p(i)));
}

template <typename Scalar>
void read_params(std::istream& in, DenseNetwork<Scalar>& net) {
    auto count = read_pod<std::uint64_t>(in);
    if (count != static_cast<std::uint64_t>(net.param_count()))
        throw std::runtime_error("checkpoint: parameter block size mismatch");
    auto& p = net.params();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        double v = read_pod<double>(in);
        if (!std::isfinite(v))
            throw std::runtime_error("checkpoint: non-finite parameter");
        p(i) = static_cast<Scalar>(v);
    }
}

}  // namespace detail

template <typename Scalar>
void save_checkpoint(std::ostream& out, const Trainer<Scalar>& trainer,
                     double noise_scale) {
    const auto& cfg = trainer.config();
    out.write(kCheckpointMagic, 4);
    detail::write_pod(out, kCheckpointVersion);
    detail::write_pod(out, static_cast<std::int64_t>(trainer.episodes_trained()));
    detail::write_pod(out, noise_scale);
    detail::write_pod(out, static_cast<std::int32_t>(cfg.num_agents));
    detail::write_pod(out, static_cast<std::int32_t>(cfg.num_subchannels));
    detail::write_dims(out, cfg.actor_hidden);
    detail::write_dims(out, cfg.critic_hidden);
    for (const auto& n : trainer.actors()) detail::write_params(out, n);
    for (const auto& n : trainer.actor_targets()) detail::write_params(out, n);
    for (const auto& n : trainer.local_critics()) detail::write_params(out, n);
    for (const auto& n : trainer.local_critic_targets())
        detail::write_params(out, n);
    detail::write_params(out, trainer.global_critic(0));
    detail::write_params(out, trainer.global_critic(1));
    detail::write_params(out, trainer.global_critic_target(0));
    detail::write_params(out, trainer.global_critic_target(1));
    if (!out) throw std::runtime_error("checkpoint: write failed");
}

template <typename Scalar>
void save_checkpoint(const std::string& path, const Trainer<Scalar>& trainer,
                     double noise_scale) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    save_checkpoint(out, trainer, noise_scale);
}

// Rebuilds a trainer around the stored shapes; learning hyperparameters
// (rates, gamma, tau, delay, batch) come from `hyper`.
template <typename Scalar>
Trainer<Scalar> load_checkpoint(std::istream& in, TrainerConfig<Scalar> hyper,
                                CheckpointMeta* meta = nullptr) {
    char magic[4];
    in.read(magic, 4);
    if (!in || magic[0] != 'A' || magic[1] != 'O' || magic[2] != 'I' ||
        magic[3] != 'C')
        throw std::runtime_error("checkpoint: bad magic");
    if (detail::read_pod<std::uint32_t>(in) != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version");
    CheckpointMeta m;
    m.episodes_trained = static_cast<long>(detail::read_pod<std::int64_t>(in));
    m.noise_scale = detail::read_pod<double>(in);
    m.num_agents = detail::read_pod<std::int32_t>(in);
    m.num_subchannels = detail::read_pod<std::int32_t>(in);
    if (m.num_agents < 1 || m.num_subchannels < 1)
        throw std::runtime_error("checkpoint: bad agent/subchannel counts");
    hyper.num_agents = m.num_agents;
    hyper.num_subchannels = m.num_subchannels;
    hyper.actor_hidden = detail::read_dims(in);
    hyper.critic_hidden = detail::read_dims(in);

    Rng scratch(0);
    Trainer<Scalar> trainer(hyper, scratch);
    for (auto& n : trainer.actors()) detail::read_params(in, n);
    for (auto& n : trainer.actor_targets()) detail::read_params(in, n);
    for (auto& n : trainer.local_critics()) detail::read_params(in, n);
    for (auto& n : trainer.local_critic_targets()) detail::read_params(in, n);
    detail::read_params(in, trainer.global_critic(0));
    detail::read_params(in, trainer.global_critic(1));
    detail::read_params(in, trainer.global_critic_target(0));
    detail::read_params(in, trainer.global_critic_target(1));
    trainer.set_episodes_trained(m.episodes_trained);
    if (meta) *meta = m;
    return trainer;
}

template <typename Scalar>
Trainer<Scalar> load_checkpoint(const std::string& path,
                                TrainerConfig<Scalar> hyper,
                                CheckpointMeta* meta = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
    return load_checkpoint(in, std::move(hyper), meta);
}

}  // namespace aoisim::marl
