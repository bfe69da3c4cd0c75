#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vmil/label_set.hpp"
#include "vmil/types.hpp"

namespace vmil {

// Dense N x H x W x C pixel block, values in [0,1], index order (n, h, w, c).
struct VideoTensor {
    int frames = 0, height = 0, width = 0, channels = 0;
    std::vector<double> data;

    VideoTensor() = default;
    VideoTensor(int n, int h, int w, int c)
        : frames(n), height(h), width(w), channels(c),
          data(static_cast<std::size_t>(n) * h * w * c, 0.0) {
        require(n >= 1 && h >= 1 && w >= 1 && c >= 1, "VideoTensor: non-positive dimension");
    }

    double& at(int n, int h, int w, int c) {
        return data[((static_cast<std::size_t>(n) * height + h) * width + w) * channels + c];
    }
    double at(int n, int h, int w, int c) const {
        return data[((static_cast<std::size_t>(n) * height + h) * width + w) * channels + c];
    }

    std::size_t frame_size() const { return static_cast<std::size_t>(height) * width * channels; }
};

// One training instance: an ordered frame tensor or a precomputed feature
// matrix (exactly one), the weak video-level label, and (synthetic data
// only) hidden per-frame labels that training never sees.
struct VideoBag {
    std::string id;
    std::optional<VideoTensor> frames;   // N x H x W x C pixels in [0,1]
    std::optional<Matrix> features;      // N x D
    LabelSet video_label;
    std::optional<std::vector<LabelSet>> frame_labels;

    bool has_pixels() const { return frames.has_value(); }
    bool has_features() const { return features.has_value(); }

    int frame_count() const {
        return has_pixels() ? frames->frames : static_cast<int>(features->rows());
    }

    void validate() const {
        require(has_pixels() != has_features(),
                "VideoBag " + id + ": exactly one of frames/features must be present");
        require(frame_count() >= 1, "VideoBag " + id + ": empty");
        if (has_features()) require_finite(*features, "VideoBag " + id + " features");
        if (has_pixels()) {
            for (double v : frames->data)
                require(v >= 0.0 && v <= 1.0, "VideoBag " + id + ": pixel outside [0,1]");
        }
        if (frame_labels) {
            require(static_cast<int>(frame_labels->size()) == frame_count(),
                    "VideoBag " + id + ": frame_labels length mismatch");
            LabelSet unioned(video_label.num_classes());
            for (const auto& fl : *frame_labels) unioned.unite(fl);
            require(unioned == video_label,
                    "VideoBag " + id + ": video_label is not the union of frame labels");
        }
    }
};

}  // namespace vmil
