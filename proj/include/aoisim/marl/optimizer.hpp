#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace aoisim::marl {

enum class OptimizerKind : int { kAdam = 0, kSgd = 1 };

// First-order updater over a flat parameter vector. Adam with the usual
// (0.9, 0.999, 1e-8) constants by default; plain SGD behind the kind switch.
template <typename Scalar>
class Optimizer {
  public:
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Optimizer() = default;
    Optimizer(OptimizerKind kind, Scalar learning_rate, Eigen::Index size)
        : kind_(kind), lr_(learning_rate) {
        if (learning_rate <= Scalar(0))
            throw std::invalid_argument("Optimizer: learning rate must be > 0");
        if (kind_ == OptimizerKind::kAdam) {
            m_ = Vec::Zero(size);
            v_ = Vec::Zero(size);
        }
    }

    void step(Vec& params, const Vec& grad) {
        if (grad.size() != params.size())
            throw std::invalid_argument("Optimizer: gradient size mismatch");
        if (kind_ == OptimizerKind::kSgd) {
            params -= lr_ * grad;
            return;
        }
        ++t_;
        m_ = beta1_ * m_ + (Scalar(1) - beta1_) * grad;
        v_ = beta2_ * v_ + (Scalar(1) - beta2_) * grad.cwiseProduct(grad);
        Scalar bc1 = Scalar(1) - std::pow(beta1_, Scalar(t_));
        Scalar bc2 = Scalar(1) - std::pow(beta2_, Scalar(t_));
        params.array() -=
            lr_ * (m_.array() / bc1) /
            ((v_.array() / bc2).sqrt() + eps_);
    }

    OptimizerKind kind() const { return kind_; }
    long steps_taken() const { return t_; }

  private:
    OptimizerKind kind_ = OptimizerKind::kAdam;
    Scalar lr_ = Scalar(1e-3);
    Scalar beta1_ = Scalar(0.9);
    Scalar beta2_ = Scalar(0.999);
    Scalar eps_ = Scalar(1e-8);
    long t_ = 0;
    Vec m_, v_;
};

}  // namespace aoisim::marl
