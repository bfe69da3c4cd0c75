#pragma once

#include <cmath>
#include <vector>

#include "vmil/types.hpp"

namespace vmil {

// Adam with L2 weight decay folded into the gradient, matching the usual
// framework behavior of a weight_decay argument.
struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
};

class Adam {
public:
    Adam(const std::vector<TensorRef>& params, AdamConfig cfg) : cfg_(cfg) {
        for (const auto& p : params) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
    }

    // One update at learning rate lr; params and grads must be the same refs
    // (same order) the optimizer was constructed with.
    void step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads, double lr) {
        require(params.size() == m_.size() && grads.size() == m_.size(), "Adam: ref list mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            double* x = params[i].data;
            const double* g = grads[i].data;
            for (Eigen::Index j = 0; j < params[i].size(); ++j) {
                const double grad = g[j] + cfg_.weight_decay * x[j];
                m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * grad;
                v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * grad * grad;
                const double mhat = m_[i][j] / bc1;
                const double vhat = v_[i][j] / bc2;
                x[j] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    long steps() const { return t_; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// Triangular cyclic schedule: rises from lr_min to lr_max over half a cycle
// and back down, indexed by epoch, starting at lr_min.
inline double cyclic_lr(int epoch, double lr_min, double lr_max, int cycle_epochs) {
    if (cycle_epochs <= 1) return lr_max;
    const int half = cycle_epochs / 2;
    const int pos = epoch % cycle_epochs;
    const double frac = pos < half ? static_cast<double>(pos) / half
                                   : static_cast<double>(cycle_epochs - pos) / (cycle_epochs - half);
    return lr_min + (lr_max - lr_min) * frac;
}

}  // namespace vmil
