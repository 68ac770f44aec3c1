#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aoisim/common/rng.hpp"

namespace aoisim::marl {

enum class Activation : std::uint8_t { kLinear = 0, kRelu = 1 };

// Fully-connected feed-forward net. All weights and biases live in one flat
// parameter vector; per-layer matrices are Eigen maps into it, so soft
// updates, optimizer steps, checkpointing and finite-difference probes all
// operate on a single contiguous array.
template <typename Scalar>
class DenseNetwork {
  public:
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    DenseNetwork() = default;

    DenseNetwork(std::vector<int> widths, std::vector<Activation> activations)
        : widths_(std::move(widths)), acts_(std::move(activations)) {
        if (widths_.size() < 2)
            throw std::invalid_argument("DenseNetwork: need at least one layer");
        if (acts_.size() != widths_.size() - 1)
            throw std::invalid_argument("DenseNetwork: one activation per layer");
        for (int w : widths_)
            if (w <= 0) throw std::invalid_argument("DenseNetwork: widths must be > 0");
        Eigen::Index total = 0;
        for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
            w_off_.push_back(total);
            total += static_cast<Eigen::Index>(widths_[l + 1]) * widths_[l];
            b_off_.push_back(total);
            total += widths_[l + 1];
        }
        params_ = Vec::Zero(total);
    }

    // Kaiming-normal hidden layers; the output layer starts near zero so
    // initial actions/values sit mid-range.
    static DenseNetwork he_init(const std::vector<int>& widths,
                                const std::vector<Activation>& activations,
                                Rng& rng) {
        DenseNetwork net(widths, activations);
        for (int l = 0; l < net.layer_count(); ++l) {
            auto w = net.weight(l);
            bool last = l == net.layer_count() - 1;
            double scale = std::sqrt(2.0 / net.widths_[static_cast<std::size_t>(l)]);
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                for (Eigen::Index i = 0; i < w.rows(); ++i)
                    w(i, j) = last ? static_cast<Scalar>(rng.uniform(-3e-3, 3e-3))
                                   : static_cast<Scalar>(rng.normal(0.0, scale));
        }
        return net;
    }

    int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
    int input_size() const { return widths_.front(); }
    int output_size() const { return widths_.back(); }
    const std::vector<int>& widths() const { return widths_; }
    const std::vector<Activation>& activations() const { return acts_; }
    Eigen::Index param_count() const { return params_.size(); }
    Vec& params() { return params_; }
    const Vec& params() const { return params_; }

    Eigen::Map<Mat> weight(int l) {
        return {params_.data() + w_off_[static_cast<std::size_t>(l)], widths_[l + 1],
                widths_[l]};
    }
    Eigen::Map<const Mat> weight(int l) const {
        return {params_.data() + w_off_[static_cast<std::size_t>(l)], widths_[l + 1],
                widths_[l]};
    }
    Eigen::Map<Vec> bias(int l) {
        return {params_.data() + b_off_[static_cast<std::size_t>(l)], widths_[l + 1]};
    }
    Eigen::Map<const Vec> bias(int l) const {
        return {params_.data() + b_off_[static_cast<std::size_t>(l)], widths_[l + 1]};
    }

    struct Cache {
        Mat input;
        std::vector<Mat> pre;   // pre-activation per layer
        std::vector<Mat> post;  // post-activation per layer
    };

    // One column per sample.
    Mat forward(const Mat& x) const {
        check_input(x);
        Mat a = x;
        for (int l = 0; l < layer_count(); ++l) {
            Mat z = weight(l) * a;
            z.colwise() += bias(l);
            a = activated(z, acts_[static_cast<std::size_t>(l)]);
        }
        return a;
    }

    Vec forward(const Vec& x) const {
        Mat out = forward(Mat(x));
        return Vec(out.col(0));
    }

    const Mat& forward(const Mat& x, Cache& cache) const {
        check_input(x);
        cache.input = x;
        cache.pre.resize(static_cast<std::size_t>(layer_count()));
        cache.post.resize(static_cast<std::size_t>(layer_count()));
        const Mat* a = &cache.input;
        for (int l = 0; l < layer_count(); ++l) {
            auto li = static_cast<std::size_t>(l);
            cache.pre[li].noalias() = weight(l) * (*a);
            cache.pre[li].colwise() += bias(l);
            cache.post[li] = activated(cache.pre[li], acts_[li]);
            a = &cache.post[li];
        }
        return cache.post.back();
    }

    // Reverse-mode pass for dL/d(output) = dy. Parameter gradients are
    // ACCUMULATED into grad (flat, params layout); returns dL/d(input).
    Mat backward(const Cache& cache, const Mat& dy, Vec& grad) const {
        return backprop(cache, dy, &grad);
    }

    // Input gradient only; skips the parameter-gradient GEMMs.
    Mat backward_input(const Cache& cache, const Mat& dy) const {
        return backprop(cache, dy, nullptr);
    }

  private:
    void check_input(const Mat& x) const {
        if (x.rows() != widths_.front())
            throw std::invalid_argument("DenseNetwork: input size mismatch");
    }

    static Mat activated(const Mat& z, Activation a) {
        if (a == Activation::kRelu) return z.cwiseMax(Scalar(0));
        return z;
    }

    Mat backprop(const Cache& cache, const Mat& dy, Vec* grad) const {
        if (grad && grad->size() != params_.size())
            throw std::invalid_argument("DenseNetwork: gradient size mismatch");
        if (dy.rows() != widths_.back() || dy.cols() != cache.input.cols())
            throw std::invalid_argument("DenseNetwork: output gradient shape mismatch");
        Mat delta = dy;
        for (int l = layer_count() - 1; l >= 0; --l) {
            auto li = static_cast<std::size_t>(l);
            if (acts_[li] == Activation::kRelu)
                delta = delta.cwiseProduct(
                    (cache.pre[li].array() > Scalar(0)).template cast<Scalar>().matrix());
            if (grad) {
                const Mat& input = l == 0 ? cache.input : cache.post[li - 1];
                Eigen::Map<Mat> dw(grad->data() + w_off_[li], widths_[l + 1], widths_[l]);
                Eigen::Map<Vec> db(grad->data() + b_off_[li], widths_[l + 1]);
                dw.noalias() += delta * input.transpose();
                db.noalias() += delta.rowwise().sum();
            }
            delta = (weight(l).transpose() * delta).eval();
        }
        return delta;
    }

    std::vector<int> widths_;
    std::vector<Activation> acts_;
    std::vector<Eigen::Index> w_off_, b_off_;
    Vec params_;
};

// Polyak blend: target <- tau*main + (1-tau)*target.
template <typename Scalar>
inline void soft_update(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& main_params,
                        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& target_params,
                        Scalar tau) {
    if (main_params.size() != target_params.size())
        throw std::invalid_argument("soft_update: parameter size mismatch");
    target_params = tau * main_params + (Scalar(1) - tau) * target_params;
}

template <typename Scalar>
inline void soft_update(const DenseNetwork<Scalar>& main_net,
                        DenseNetwork<Scalar>& target_net, Scalar tau) {
    soft_update(main_net.params(), target_net.params(), tau);
}

}  // namespace aoisim::marl
