#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include "vmil/image_ops.hpp"
#include "vmil/matrix_io.hpp"
#include "vmil/rng.hpp"
#include "vmil/types.hpp"
#include "vmil/video_bag.hpp"

namespace vmil {

struct BackboneConfig {
    std::string kind = "synthetic";  // "synthetic" or a pretrained adapter name
    int output_dim = 2048;
    int resize_height = 224;
    int resize_width = 224;
    std::uint64_t seed = 0;
    std::string weights_path;        // pretrained adapters only

    std::string cache_key() const {
        return kind + "-d" + std::to_string(output_dim) + "-r" + std::to_string(resize_height) +
               "x" + std::to_string(resize_width) + "-s" + std::to_string(seed);
    }
};

// Maps raw frames to per-frame feature rows. Deterministic in eval mode;
// concurrent extraction over immutable weights is allowed.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual Matrix extract(const VideoTensor& frames) const = 0;
    virtual int output_dim() const = 0;
};

// Fixed seeded random linear map of the flattened resized frame, squashed
// through tanh. Stands in for a pretrained CNN so the whole pipeline runs
// without model-zoo downloads. The map is materialized at construction:
// keep output_dim x (resize area x channels) at desk scale.
class SyntheticProjector : public FeatureExtractor {
public:
    SyntheticProjector(const BackboneConfig& cfg, int channels = 3) : cfg_(cfg), channels_(channels) {
        const Eigen::Index in_dim =
            static_cast<Eigen::Index>(cfg.resize_height) * cfg.resize_width * channels;
        map_ = Matrix(cfg.output_dim, in_dim);
        Rng rng(derive_seed(cfg.seed, "projector"));
        const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
        for (Eigen::Index r = 0; r < map_.rows(); ++r)
            for (Eigen::Index c = 0; c < map_.cols(); ++c) map_(r, c) = scale * rng.normal();
    }

    Matrix extract(const VideoTensor& frames) const override {
        require(frames.frames >= 1, "extract: no frames");
        for (double v : frames.data)
            require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "extract: pixel outside [0,1]");
        require(frames.channels == channels_, "extract: channel-count mismatch");
        const VideoTensor resized = resize_video(frames, cfg_.resize_height, cfg_.resize_width);
        Matrix out(frames.frames, cfg_.output_dim);
        const std::size_t fs = resized.frame_size();
        for (int n = 0; n < frames.frames; ++n) {
            Eigen::Map<const Vector> flat(resized.data.data() + n * fs,
                                          static_cast<Eigen::Index>(fs));
            out.row(n) = (map_ * flat).array().tanh().transpose();
        }
        return out;
    }

    int output_dim() const override { return cfg_.output_dim; }

    // Gradient support for the unfrozen mode: given dFeatures, accumulates
    // the map gradient. dOut/dmap through tanh of the linear response.
    Matrix map_gradient(const VideoTensor& frames, const Matrix& d_features) const {
        const VideoTensor resized = resize_video(frames, cfg_.resize_height, cfg_.resize_width);
        Matrix grad = Matrix::Zero(map_.rows(), map_.cols());
        const std::size_t fs = resized.frame_size();
        for (int n = 0; n < frames.frames; ++n) {
            Eigen::Map<const Vector> flat(resized.data.data() + n * fs,
                                          static_cast<Eigen::Index>(fs));
            const Vector z = map_ * flat;
            const Vector dz =
                d_features.row(n).transpose().cwiseProduct((1.0 - z.array().tanh().square()).matrix());
            grad.noalias() += dz * flat.transpose();
        }
        return grad;
    }

    Matrix& map() { return map_; }
    const Matrix& map() const { return map_; }

private:
    BackboneConfig cfg_;
    int channels_;
    Matrix map_;
};

inline std::unique_ptr<FeatureExtractor> make_extractor(const BackboneConfig& cfg,
                                                        int channels = 3) {
    if (cfg.kind == "synthetic") return std::make_unique<SyntheticProjector>(cfg, channels);
    // Pretrained adapter slot. No weights ship with this repository, and a
    // missing or unreadable weight file must surface loudly rather than fall
    // back to anything else.
    if (cfg.weights_path.empty() || !std::filesystem::exists(cfg.weights_path))
        throw BackboneUnavailable("backbone '" + cfg.kind + "' unavailable: weights not found at '" +
                                  cfg.weights_path + "'; use kind=synthetic or a feature cache");
    throw BackboneUnavailable("backbone '" + cfg.kind +
                              "': no loader registered for the supplied weights");
}

// Per-video feature cache keyed by (video id, extractor config).
inline std::string cache_path(const std::string& cache_dir, const std::string& video_id,
                              const BackboneConfig& cfg) {
    return (std::filesystem::path(cache_dir) / (video_id + "." + cfg.cache_key() + ".vmat")).string();
}

inline Matrix extract_cached(const FeatureExtractor& ex, const BackboneConfig& cfg,
                             const VideoBag& bag, const std::string& cache_dir) {
    require(bag.has_pixels(), "extract_cached: bag has no pixel data");
    const std::string path = cache_path(cache_dir, bag.id, cfg);
    if (std::filesystem::exists(path)) return read_matrix(path);
    Matrix f = ex.extract(*bag.frames);
    std::filesystem::create_directories(cache_dir);
    write_matrix(path, f);
    return f;
}

}  // namespace vmil
