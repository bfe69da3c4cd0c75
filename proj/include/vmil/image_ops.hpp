#pragma once

#include <algorithm>
#include <cmath>

#include "vmil/types.hpp"
#include "vmil/video_bag.hpp"

namespace vmil {

// Bilinear sampling with align-corners index mapping, so a same-size resize
// (and a scale-1.0 zoom) reproduces the input exactly.
inline VideoTensor resize_video(const VideoTensor& in, int out_h, int out_w) {
    require(out_h >= 1 && out_w >= 1, "resize_video: non-positive target");
    VideoTensor out(in.frames, out_h, out_w, in.channels);
    const double sy = out_h > 1 ? static_cast<double>(in.height - 1) / (out_h - 1) : 0.0;
    const double sx = out_w > 1 ? static_cast<double>(in.width - 1) / (out_w - 1) : 0.0;
    for (int n = 0; n < in.frames; ++n)
        for (int i = 0; i < out_h; ++i) {
            const double fy = i * sy;
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, in.height - 1);
            const double wy = fy - y0;
            for (int j = 0; j < out_w; ++j) {
                const double fx = j * sx;
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, in.width - 1);
                const double wx = fx - x0;
                for (int c = 0; c < in.channels; ++c) {
                    const double top = (1.0 - wx) * in.at(n, y0, x0, c) + wx * in.at(n, y0, x1, c);
                    const double bot = (1.0 - wx) * in.at(n, y1, x0, c) + wx * in.at(n, y1, x1, c);
                    out.at(n, i, j, c) = (1.0 - wy) * top + wy * bot;
                }
            }
        }
    return out;
}

inline VideoTensor flip_horizontal(const VideoTensor& in) {
    VideoTensor out(in.frames, in.height, in.width, in.channels);
    for (int n = 0; n < in.frames; ++n)
        for (int h = 0; h < in.height; ++h)
            for (int w = 0; w < in.width; ++w)
                for (int c = 0; c < in.channels; ++c)
                    out.at(n, h, w, c) = in.at(n, h, in.width - 1 - w, c);
    return out;
}

inline VideoTensor flip_vertical(const VideoTensor& in) {
    VideoTensor out(in.frames, in.height, in.width, in.channels);
    for (int n = 0; n < in.frames; ++n)
        for (int h = 0; h < in.height; ++h)
            for (int w = 0; w < in.width; ++w)
                for (int c = 0; c < in.channels; ++c)
                    out.at(n, h, w, c) = in.at(n, in.height - 1 - h, w, c);
    return out;
}

// Centered crop to scale*(H,W) followed by a bilinear resize back to (H,W).
// scale 1.0 is the identity.
inline VideoTensor center_zoom(const VideoTensor& in, double scale) {
    require(scale > 0.0 && scale <= 1.0, "center_zoom: scale outside (0,1]");
    const int crop_h = std::max(1, static_cast<int>(std::lround(scale * in.height)));
    const int crop_w = std::max(1, static_cast<int>(std::lround(scale * in.width)));
    const int off_h = (in.height - crop_h) / 2;
    const int off_w = (in.width - crop_w) / 2;
    VideoTensor crop(in.frames, crop_h, crop_w, in.channels);
    for (int n = 0; n < in.frames; ++n)
        for (int h = 0; h < crop_h; ++h)
            for (int w = 0; w < crop_w; ++w)
                for (int c = 0; c < in.channels; ++c)
                    crop.at(n, h, w, c) = in.at(n, h + off_h, w + off_w, c);
    return resize_video(crop, in.height, in.width);
}

}  // namespace vmil
