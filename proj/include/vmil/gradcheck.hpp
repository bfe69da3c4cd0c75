#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vmil/lstm.hpp"
#include "vmil/types.hpp"

namespace vmil {

struct GradCheckReport {
    struct Entry {
        std::string name;
        double max_rel_err;
    };
    std::vector<Entry> per_tensor;
    double max_rel_err = 0.0;
};

inline double grad_rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(1e-6, std::abs(analytic) + std::abs(numeric));
}

// Central-difference check of analytic gradients. `loss` re-evaluates the
// objective from the current parameter values; param and grad refs must be
// parallel. Perturbation is restored exactly after each probe.
inline GradCheckReport finite_diff_check(const std::function<double()>& loss,
                                         const std::vector<TensorRef>& params,
                                         const std::vector<TensorRef>& grads,
                                         double eps = 1e-5) {
    require(params.size() == grads.size(), "finite_diff_check: ref list mismatch");
    GradCheckReport report;
    for (std::size_t t = 0; t < params.size(); ++t) {
        require(params[t].size() == grads[t].size(), "finite_diff_check: tensor size mismatch");
        double worst = 0.0;
        for (Eigen::Index i = 0; i < params[t].size(); ++i) {
            double& x = params[t].data[i];
            const double saved = x;
            x = saved + eps;
            const double up = loss();
            x = saved - eps;
            const double down = loss();
            x = saved;
            const double numeric = (up - down) / (2.0 * eps);
            worst = std::max(worst, grad_rel_err(grads[t].data[i], numeric));
        }
        report.per_tensor.push_back({params[t].name, worst});
        report.max_rel_err = std::max(report.max_rel_err, worst);
    }
    return report;
}

// temporal_core gradient check: probe loss sum(C .* forward(X)) against
// central differences for every parameter tensor of the residual block.
inline GradCheckReport gradient_check_temporal(ResidualBiLstmParams& params, const Matrix& X,
                                               const Matrix& probe, double eps = 1e-5) {
    require(probe.rows() == X.rows() && probe.cols() == params.output_dim(),
            "gradient_check_temporal: probe shape mismatch");
    ResidualBiLstmParams grads = zeros_like(params);
    ResidualBiLstmCache cache;
    residual_bilstm_forward(X, params, &cache);
    residual_bilstm_backward(params, cache, probe, grads);
    auto loss = [&]() { return (residual_bilstm_forward(X, params, nullptr).array() * probe.array()).sum(); };
    return finite_diff_check(loss, tensor_refs(params), tensor_refs(grads), eps);
}

}  // namespace vmil
