#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "aoisim/common/rng.hpp"
#include "aoisim/marl/dense_network.hpp"
#include "aoisim/radio/channel.hpp"

namespace aoisim::marl {

// Exploration noise is clipped before the squash so a single draw can never
// slam the policy to a saturation rail.
inline constexpr double kNoiseClip = 0.5;

template <typename Scalar>
inline Scalar sigmoid(Scalar x) {
    return Scalar(1) / (Scalar(1) + std::exp(-x));
}

// Maps raw actor outputs (N subchannel logits + 1 power head) to an
// executable decision: argmax subchannel (lowest index wins ties) and
// sigmoid-squashed power. Exploration perturbs the pre-squash outputs.
template <typename Scalar>
radio::AllocationDecision select_action(
    const DenseNetwork<Scalar>& actor,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& state, bool explore,
    double noise_scale, double max_power_mw, Rng& rng,
    double noise_clip = kNoiseClip) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> raw = actor.forward(state);
    int n = static_cast<int>(raw.size()) - 1;
    if (explore) {
        for (int i = 0; i < n; ++i)
            raw(i) += static_cast<Scalar>(
                std::clamp(noise_scale * rng.normal(), -noise_clip, noise_clip));
    }
    radio::AllocationDecision d;
    d.subchannel = 0;
    for (int i = 1; i < n; ++i)
        if (raw(i) > raw(d.subchannel)) d.subchannel = i;
    // Power noise perturbs the squashed fraction, not the logit: a saturated
    // sigmoid would otherwise absorb any perturbation and freeze exploration.
    double frac = static_cast<double>(sigmoid(raw(n)));
    if (explore)
        frac += std::clamp(noise_scale * rng.normal(), -noise_clip, noise_clip);
    d.power_mw = max_power_mw * std::clamp(frac, 0.0, 1.0);
    return d;
}

// Executed action as the critics see it: one-hot subchannel plus power
// normalized to [0,1].
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> to_action_vector(
    const radio::AllocationDecision& d, int num_subchannels, double max_power_mw) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(num_subchannels + 1);
    if (d.subchannel >= 0 && d.subchannel < num_subchannels) a(d.subchannel) = Scalar(1);
    a(num_subchannels) = static_cast<Scalar>(d.power_mw / max_power_mw);
    return a;
}

// Column-wise (one-hot argmax, sigmoid power) for target-policy actions.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> executable_action_columns(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& raw) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::Index n = raw.rows() - 1;
    Mat out = Mat::Zero(raw.rows(), raw.cols());
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < n; ++i)
            if (raw(i, j) > raw(best, j)) best = i;
        out(best, j) = Scalar(1);
        out(n, j) = sigmoid(raw(n, j));
    }
    return out;
}

// Column-wise differentiable surrogate (tempered softmax subchannel weights,
// sigmoid power) used when gradients must flow through the action. A
// temperature below 1 sharpens the softmax toward the executable one-hot.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> relaxed_action_columns(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& raw,
    Scalar temperature = Scalar(1)) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::Index n = raw.rows() - 1;
    Scalar inv_t = Scalar(1) / temperature;
    Mat out(raw.rows(), raw.cols());
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        Scalar mx = raw.col(j).head(n).maxCoeff();
        Scalar denom = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, j) = std::exp((raw(i, j) - mx) * inv_t);
            denom += out(i, j);
        }
        out.col(j).head(n) /= denom;
        out(n, j) = sigmoid(raw(n, j));
    }
    return out;
}

// Chain rule through relaxed_action_columns: given d(loss)/d(action),
// produce d(loss)/d(raw actor output).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> relaxed_action_backward(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& action,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& d_action,
    Scalar temperature = Scalar(1)) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::Index n = action.rows() - 1;
    Scalar inv_t = Scalar(1) / temperature;
    Mat d_raw(action.rows(), action.cols());
    for (Eigen::Index j = 0; j < action.cols(); ++j) {
        Scalar dot = 0;
        for (Eigen::Index i = 0; i < n; ++i) dot += d_action(i, j) * action(i, j);
        for (Eigen::Index i = 0; i < n; ++i)
            d_raw(i, j) = action(i, j) * (d_action(i, j) - dot) * inv_t;
        Scalar p = action(n, j);
        d_raw(n, j) = d_action(n, j) * p * (Scalar(1) - p);
    }
    return d_raw;
}

}  // namespace aoisim::marl
