#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vmil/rng.hpp"
#include "vmil/types.hpp"

namespace vmil {

inline Vector sigmoid(const Vector& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

// One recurrence direction. Gate order in the stacked 4H rows: input,
// forget, candidate, output.
struct LstmCellParams {
    Matrix w_in;   // 4H x In
    Matrix w_rec;  // 4H x H
    Vector bias;   // 4H

    int hidden() const { return static_cast<int>(w_rec.cols()); }
    int input_dim() const { return static_cast<int>(w_in.cols()); }
};

struct BiLstmParams {
    struct Layer {
        LstmCellParams fwd, bwd;
    };
    std::vector<Layer> layers;

    int hidden() const { return layers.front().fwd.hidden(); }
    int input_dim() const { return layers.front().fwd.input_dim(); }
    int output_dim() const { return 2 * hidden(); }
};

// Bidirectional stack plus the linear projection that carries the input
// features onto the summation node: out = stack(X) + X * proj^T.
struct ResidualBiLstmParams {
    BiLstmParams core;
    Matrix proj;  // M x D, M = 2*hidden

    int input_dim() const { return core.input_dim(); }
    int output_dim() const { return core.output_dim(); }
};

inline LstmCellParams make_lstm_cell(int input_dim, int hidden, Rng& rng) {
    LstmCellParams p;
    p.w_in = Matrix(4 * hidden, input_dim);
    p.w_rec = Matrix(4 * hidden, hidden);
    p.bias = Vector::Zero(4 * hidden);
    const double bi = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double br = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (Eigen::Index r = 0; r < p.w_in.rows(); ++r)
        for (Eigen::Index c = 0; c < p.w_in.cols(); ++c) p.w_in(r, c) = rng.uniform(-bi, bi);
    for (Eigen::Index r = 0; r < p.w_rec.rows(); ++r)
        for (Eigen::Index c = 0; c < p.w_rec.cols(); ++c) p.w_rec(r, c) = rng.uniform(-br, br);
    p.bias.segment(hidden, hidden).setOnes();  // forget-gate bias +1
    return p;
}

inline BiLstmParams make_bilstm(int input_dim, int hidden, int num_layers, Rng& rng) {
    require(input_dim >= 1 && hidden >= 1 && num_layers >= 1, "make_bilstm: bad dims");
    BiLstmParams p;
    for (int l = 0; l < num_layers; ++l) {
        const int in = l == 0 ? input_dim : 2 * hidden;
        p.layers.push_back({make_lstm_cell(in, hidden, rng), make_lstm_cell(in, hidden, rng)});
    }
    return p;
}

inline ResidualBiLstmParams make_residual_bilstm(int input_dim, int hidden, int num_layers,
                                                 Rng& rng) {
    ResidualBiLstmParams p;
    p.core = make_bilstm(input_dim, hidden, num_layers, rng);
    p.proj = Matrix(2 * hidden, input_dim);
    const double b = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (Eigen::Index r = 0; r < p.proj.rows(); ++r)
        for (Eigen::Index c = 0; c < p.proj.cols(); ++c) p.proj(r, c) = rng.uniform(-b, b);
    return p;
}

inline LstmCellParams zeros_like(const LstmCellParams& p) {
    return {Matrix::Zero(p.w_in.rows(), p.w_in.cols()), Matrix::Zero(p.w_rec.rows(), p.w_rec.cols()),
            Vector::Zero(p.bias.size())};
}

inline BiLstmParams zeros_like(const BiLstmParams& p) {
    BiLstmParams z;
    for (const auto& l : p.layers) z.layers.push_back({zeros_like(l.fwd), zeros_like(l.bwd)});
    return z;
}

inline ResidualBiLstmParams zeros_like(const ResidualBiLstmParams& p) {
    return {zeros_like(p.core), Matrix::Zero(p.proj.rows(), p.proj.cols())};
}

// Everything the backward pass needs, indexed by sequence position.
struct LstmDirCache {
    Matrix i, f, g, o;  // N x H gate activations
    Matrix c, tanh_c;   // N x H cell state and its tanh
    Matrix h;           // N x H hidden states
};

struct BiLstmCache {
    struct Layer {
        Matrix input;  // N x In rows fed to this layer
        LstmDirCache fwd, bwd;
    };
    std::vector<Layer> layers;
    Matrix output;  // N x 2H
};

inline void lstm_dir_forward(const Matrix& X, const LstmCellParams& p, bool reverse,
                             LstmDirCache& cache) {
    const int n = static_cast<int>(X.rows());
    const int hid = p.hidden();
    cache.i.resize(n, hid);
    cache.f.resize(n, hid);
    cache.g.resize(n, hid);
    cache.o.resize(n, hid);
    cache.c.resize(n, hid);
    cache.tanh_c.resize(n, hid);
    cache.h.resize(n, hid);
    Vector h_prev = Vector::Zero(hid);
    Vector c_prev = Vector::Zero(hid);
    for (int step = 0; step < n; ++step) {
        const int t = reverse ? n - 1 - step : step;
        Vector a = p.w_in * X.row(t).transpose() + p.w_rec * h_prev + p.bias;
        const Vector i = sigmoid(a.segment(0, hid));
        const Vector f = sigmoid(a.segment(hid, hid));
        const Vector g = a.segment(2 * hid, hid).array().tanh().matrix();
        const Vector o = sigmoid(a.segment(3 * hid, hid));
        const Vector c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
        const Vector tc = c.array().tanh().matrix();
        cache.i.row(t) = i;
        cache.f.row(t) = f;
        cache.g.row(t) = g;
        cache.o.row(t) = o;
        cache.c.row(t) = c;
        cache.tanh_c.row(t) = tc;
        cache.h.row(t) = o.cwiseProduct(tc);
        h_prev = cache.h.row(t);
        c_prev = c;
    }
}

// Accumulates parameter gradients into `grad` and returns dL/dX for this
// direction. dH is position-indexed like the cache.
inline Matrix lstm_dir_backward(const Matrix& X, const LstmCellParams& p, bool reverse,
                                const LstmDirCache& cache, const Matrix& dH,
                                LstmCellParams& grad) {
    const int n = static_cast<int>(X.rows());
    const int hid = p.hidden();
    Matrix dX = Matrix::Zero(X.rows(), X.cols());
    Vector dh_rec = Vector::Zero(hid);
    Vector dc = Vector::Zero(hid);
    for (int step = n - 1; step >= 0; --step) {
        const int t = reverse ? n - 1 - step : step;
        const int prev_t = reverse ? t + 1 : t - 1;
        const Vector dh_total = dH.row(t).transpose() + dh_rec;
        const Vector i = cache.i.row(t), f = cache.f.row(t), g = cache.g.row(t),
                     o = cache.o.row(t), tc = cache.tanh_c.row(t);
        const Vector da_o =
            dh_total.cwiseProduct(tc).cwiseProduct(o.cwiseProduct(Vector::Ones(hid) - o));
        dc += dh_total.cwiseProduct(o).cwiseProduct(
            (1.0 - tc.array().square()).matrix());
        const Vector c_prev = step == 0 ? Vector::Zero(hid) : Vector(cache.c.row(prev_t));
        const Vector h_prev = step == 0 ? Vector::Zero(hid) : Vector(cache.h.row(prev_t));
        const Vector da_f =
            dc.cwiseProduct(c_prev).cwiseProduct(f.cwiseProduct(Vector::Ones(hid) - f));
        const Vector da_i =
            dc.cwiseProduct(g).cwiseProduct(i.cwiseProduct(Vector::Ones(hid) - i));
        const Vector da_g = dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());
        Vector da(4 * hid);
        da << da_i, da_f, da_g, da_o;
        grad.w_in.noalias() += da * X.row(t);
        grad.w_rec.noalias() += da * h_prev.transpose();
        grad.bias += da;
        dX.row(t) += (p.w_in.transpose() * da).transpose();
        dh_rec.noalias() = p.w_rec.transpose() * da;
        dc = dc.cwiseProduct(f);
    }
    return dX;
}

// Stacked bidirectional forward. Output row t is [fwd_state_t | bwd_state_t]
// of the last layer; layer l > 0 consumes the concatenated output of l-1.
inline Matrix bilstm_forward(const Matrix& X, const BiLstmParams& p, BiLstmCache* cache) {
    require(X.rows() >= 1, "bilstm_forward: empty sequence");
    require_finite(X, "bilstm_forward input");
    require(static_cast<int>(X.cols()) == p.input_dim(), "bilstm_forward: input dim mismatch");
    BiLstmCache local;
    BiLstmCache& c = cache ? *cache : local;
    c.layers.assign(p.layers.size(), {});
    Matrix in = X;
    const int hid = p.hidden();
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        c.layers[l].input = in;
        lstm_dir_forward(in, p.layers[l].fwd, false, c.layers[l].fwd);
        lstm_dir_forward(in, p.layers[l].bwd, true, c.layers[l].bwd);
        Matrix out(in.rows(), 2 * hid);
        out.leftCols(hid) = c.layers[l].fwd.h;
        out.rightCols(hid) = c.layers[l].bwd.h;
        in = std::move(out);
    }
    c.output = in;
    return c.output;
}

inline Matrix bilstm_backward(const BiLstmParams& p, const BiLstmCache& cache, const Matrix& dOut,
                              BiLstmParams& grad) {
    const int hid = p.hidden();
    Matrix d = dOut;
    for (int l = static_cast<int>(p.layers.size()) - 1; l >= 0; --l) {
        const auto& lc = cache.layers[l];
        Matrix dX = lstm_dir_backward(lc.input, p.layers[l].fwd, false, lc.fwd, d.leftCols(hid),
                                      grad.layers[l].fwd);
        dX += lstm_dir_backward(lc.input, p.layers[l].bwd, true, lc.bwd, d.rightCols(hid),
                                grad.layers[l].bwd);
        d = std::move(dX);
    }
    return d;
}

struct ResidualBiLstmCache {
    BiLstmCache core;
    Matrix input;  // N x D
};

// temporal_core forward: concatenated forward/backward temporal features of
// the stack, summed with the projected copy of the spatial input.
inline Matrix residual_bilstm_forward(const Matrix& X, const ResidualBiLstmParams& p,
                                      ResidualBiLstmCache* cache) {
    ResidualBiLstmCache local;
    ResidualBiLstmCache& c = cache ? *cache : local;
    c.input = X;
    Matrix out = bilstm_forward(X, p.core, &c.core);
    out.noalias() += X * p.proj.transpose();
    return out;
}

inline Matrix residual_bilstm_backward(const ResidualBiLstmParams& p,
                                       const ResidualBiLstmCache& cache, const Matrix& dOut,
                                       ResidualBiLstmParams& grad) {
    grad.proj.noalias() += dOut.transpose() * cache.input;
    Matrix dX = bilstm_backward(p.core, cache.core, dOut, grad.core);
    dX.noalias() += dOut * p.proj;
    return dX;
}

inline std::vector<TensorRef> tensor_refs(BiLstmParams& p, const std::string& prefix = "lstm") {
    std::vector<TensorRef> refs;
    auto add_cell = [&](const std::string& base, LstmCellParams& c) {
        refs.push_back({base + ".w_in", c.w_in.data(), c.w_in.rows(), c.w_in.cols()});
        refs.push_back({base + ".w_rec", c.w_rec.data(), c.w_rec.rows(), c.w_rec.cols()});
        refs.push_back({base + ".bias", c.bias.data(), c.bias.size(), 1});
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const std::string base = prefix + ".l" + std::to_string(l);
        add_cell(base + ".fwd", p.layers[l].fwd);
        add_cell(base + ".bwd", p.layers[l].bwd);
    }
    return refs;
}

inline std::vector<TensorRef> tensor_refs(ResidualBiLstmParams& p) {
    auto refs = tensor_refs(p.core);
    refs.push_back({"proj", p.proj.data(), p.proj.rows(), p.proj.cols()});
    return refs;
}

// Final-state vector for the AttenConv head: forward state after the last
// frame and backward state after the first (each direction's full pass).
inline Vector bilstm_final_state(const Matrix& out, int hidden) {
    Vector v(2 * hidden);
    v.head(hidden) = out.row(out.rows() - 1).head(hidden);
    v.tail(hidden) = out.row(0).tail(hidden);
    return v;
}

inline Matrix bilstm_final_state_grad(Eigen::Index n, int hidden, const Vector& d_final) {
    Matrix d = Matrix::Zero(n, 2 * hidden);
    d.row(n - 1).head(hidden) = d_final.head(hidden);
    d.row(0).tail(hidden) = d_final.tail(hidden);
    return d;
}

}  // namespace vmil
