#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include <opencv2/core.hpp>

#include "checkfield/geometry.hpp"

namespace checkfield {

inline constexpr int kModelSide = 960;  // detector input is 960x960x3

// A decoded check image. Pixels are 8-bit 3-channel BGR (OpenCV convention).
struct CheckImage {
    cv::Mat pixels;
    std::string source_id;

    int width() const { return pixels.cols; }
    int height() const { return pixels.rows; }

    // Reads PNG/JPEG; source_id defaults to the filename stem.
    static CheckImage load(const std::filesystem::path& path);
    static CheckImage from_mat(cv::Mat mat, std::string source_id);
};

// Maps between original image coordinates and the padded 960x960 model input.
// Content is anchored top-left; padding fills the right and bottom.
struct PadTransform {
    double scale = 1.0;  // model = original * scale
    int pad_right = 0;
    int pad_bottom = 0;

    int content_width() const { return kModelSide - pad_right; }
    int content_height() const { return kModelSide - pad_bottom; }

    double to_model_x(double x) const { return x * scale; }
    double to_model_y(double y) const { return y * scale; }
    double to_original_x(double x) const { return x / scale; }
    double to_original_y(double y) const { return y / scale; }

    BoundingBox to_model(const BoundingBox& box) const;
};

// Uniformly scales so the longer side becomes 960, pads the remainder with
// mid-gray, and returns the transform needed to map boxes back.
std::pair<cv::Mat, PadTransform> resize_pad(const CheckImage& image);

// Inverse-maps a model-space box onto the original image and clamps it to the
// image bounds. Boxes that land entirely in the padding raise OutOfContentError.
BoundingBox to_original(const BoundingBox& box, const PadTransform& transform,
                        double original_width, double original_height);

void save_png(const cv::Mat& image, const std::filesystem::path& path);

// Stable 64-bit content hash over dimensions and pixel bytes, hex-encoded.
// Used to fingerprint backend requests for record/replay.
std::string image_content_hash(const cv::Mat& image);

}  // namespace checkfield
