#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "vmil/metrics.hpp"
#include "vmil/types.hpp"
#include "vmil/video_bag.hpp"

namespace vmil {

// Grayscale view of one frame: channel mean per pixel.
inline Matrix frame_to_gray(const VideoTensor& video, int frame) {
    require(frame >= 0 && frame < video.frames, "frame_to_gray: frame index out of range");
    Matrix g(video.height, video.width);
    for (int h = 0; h < video.height; ++h)
        for (int w = 0; w < video.width; ++w) {
            double sum = 0.0;
            for (int c = 0; c < video.channels; ++c) sum += video.at(frame, h, w, c);
            g(h, w) = sum / video.channels;
        }
    return g;
}

// Binary PGM (P5), 8-bit, lossless; input pixels in [0,1].
inline void write_pgm(const std::string& path, const Matrix& pixels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    out << "P5\n" << pixels.cols() << " " << pixels.rows() << "\n255\n";
    for (Eigen::Index r = 0; r < pixels.rows(); ++r)
        for (Eigen::Index c = 0; c < pixels.cols(); ++c) {
            const double v = std::clamp(pixels(r, c), 0.0, 1.0);
            const auto byte = static_cast<std::uint8_t>(std::lround(v * 255.0));
            out.put(static_cast<char>(byte));
        }
    if (!out) throw RuntimeAbort("short write: " + path);
}

// Full-precision alpha export, one weight per line.
inline void write_alpha(const std::string& path, const Vector& alpha) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) out << alpha[i] << "\n";
    if (!out) throw RuntimeAbort("short write: " + path);
}

inline Vector read_alpha(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeAbort("cannot open: " + path);
    std::vector<double> values;
    double v;
    while (in >> v) values.push_back(v);
    Vector alpha(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) alpha[static_cast<Eigen::Index>(i)] = values[i];
    return alpha;
}

// Encoded frame for export: real pixels when the bag has them, otherwise a
// uniform mid-gray card so the brightness strip still tracks alpha for
// feature-only bags.
inline Matrix encoded_frame_for_export(const VideoBag& bag, int frame, double alpha,
                                       int card_size = 32) {
    if (bag.has_pixels()) return encode_attention_frame(frame_to_gray(*bag.frames, frame), alpha);
    return encode_attention_frame(Matrix::Constant(card_size, card_size, 0.5), alpha);
}

}  // namespace vmil
