#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "aoisim/common/rng.hpp"

namespace aoisim::marl {

template <typename Scalar>
struct Transition {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Vec joint_state;       // V * state_dim
    Vec joint_action;      // V * action_dim, executed (one-hot + normalized power)
    Vec local_rewards;     // V
    Scalar global_reward = 0;
    Vec next_joint_state;  // V * state_dim
    Scalar done = 0;       // 1 on the final slot of an episode
};

// Fixed-capacity FIFO ring. Index 0 is always the oldest stored transition.
template <typename Scalar>
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0)
            throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
        data_.reserve(std::min<std::size_t>(capacity, 4096));
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return data_.size(); }

    void push(Transition<Scalar> t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[head_] = std::move(t);
            head_ = (head_ + 1) % capacity_;
        }
    }

    const Transition<Scalar>& at(std::size_t i) const {
        if (i >= data_.size())
            throw std::out_of_range("ReplayBuffer: index out of range");
        return data_[(head_ + i) % data_.size()];
    }

    // Uniform sample of `count` DISTINCT positions (Floyd's algorithm);
    // requires at least `count` stored transitions.
    std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const {
        if (count > data_.size())
            throw std::invalid_argument("ReplayBuffer: not enough transitions to sample");
        std::vector<std::size_t> picked;
        picked.reserve(count);
        for (std::size_t j = data_.size() - count; j < data_.size(); ++j) {
            std::size_t t = static_cast<std::size_t>(
                rng.uniform_int(static_cast<std::uint64_t>(j) + 1));
            if (std::find(picked.begin(), picked.end(), t) != picked.end())
                picked.push_back(j);
            else
                picked.push_back(t);
        }
        return picked;
    }

  private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // slot holding the oldest element once full
    std::vector<Transition<Scalar>> data_;
};

}  // namespace aoisim::marl
