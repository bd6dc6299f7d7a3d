#include "checkfield/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "checkfield/errors.hpp"
#include "checkfield/util.hpp"

namespace checkfield {

CheckImage CheckImage::load(const std::filesystem::path& path) {
    cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (mat.empty()) {
        throw InputError("CheckImage::load: cannot decode image '" + path.string() + "'");
    }
    return from_mat(std::move(mat), path.stem().string());
}

CheckImage CheckImage::from_mat(cv::Mat mat, std::string source_id) {
    if (mat.empty() || mat.cols < 1 || mat.rows < 1) {
        throw InputError("CheckImage: image has no pixels");
    }
    if (mat.type() != CV_8UC3) {
        throw InputError("CheckImage: expected 8-bit 3-channel pixels");
    }
    return CheckImage{std::move(mat), std::move(source_id)};
}

BoundingBox PadTransform::to_model(const BoundingBox& box) const {
    return BoundingBox(to_model_x(box.x1), to_model_y(box.y1),
                       to_model_x(box.x2), to_model_y(box.y2), CoordSpace::model_space);
}

std::pair<cv::Mat, PadTransform> resize_pad(const CheckImage& image) {
    const int w = image.width();
    const int h = image.height();
    if (w < 1 || h < 1) {
        throw InputError("resize_pad: image has no pixels");
    }
    PadTransform transform;
    transform.scale = static_cast<double>(kModelSide) / static_cast<double>(std::max(w, h));
    const int content_w = static_cast<int>(std::lround(w * transform.scale));
    const int content_h = static_cast<int>(std::lround(h * transform.scale));
    transform.pad_right = kModelSide - content_w;
    transform.pad_bottom = kModelSide - content_h;

    cv::Mat model(kModelSide, kModelSide, CV_8UC3, cv::Scalar(128, 128, 128));
    cv::Mat content_area = model(cv::Rect(0, 0, content_w, content_h));
    if (content_w == w && content_h == h) {
        image.pixels.copyTo(content_area);
    } else {
        cv::resize(image.pixels, content_area, cv::Size(content_w, content_h), 0.0, 0.0,
                   cv::INTER_LINEAR);
    }
    return {model, transform};
}

BoundingBox to_original(const BoundingBox& box, const PadTransform& transform,
                        double original_width, double original_height) {
    if (box.space != CoordSpace::model_space) {
        throw ContractError("to_original: box must be in model_space");
    }
    if (box.x1 >= transform.content_width() || box.y1 >= transform.content_height()) {
        throw OutOfContentError("to_original: box lies entirely inside the padding region");
    }
    const double x1 = std::clamp(transform.to_original_x(box.x1), 0.0, original_width);
    const double y1 = std::clamp(transform.to_original_y(box.y1), 0.0, original_height);
    const double x2 = std::clamp(transform.to_original_x(box.x2), 0.0, original_width);
    const double y2 = std::clamp(transform.to_original_y(box.y2), 0.0, original_height);
    if (!(x1 < x2) || !(y1 < y2)) {
        throw ContractError("to_original: box degenerate after clamping to original bounds");
    }
    return BoundingBox(x1, y1, x2, y2, CoordSpace::original_space);
}

void save_png(const cv::Mat& image, const std::filesystem::path& path) {
    if (!cv::imwrite(path.string(), image)) {
        throw InputError("save_png: cannot write '" + path.string() + "'");
    }
}

std::string image_content_hash(const cv::Mat& image) {
    Fnv1a64 hash;
    const int dims[3] = {image.cols, image.rows, image.channels()};
    hash.update(dims, sizeof(dims));
    for (int row = 0; row < image.rows; ++row) {
        hash.update(image.ptr(row), image.cols * image.elemSize());
    }
    return hash.hex();
}

}  // namespace checkfield
