#include "checkfield/render.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "checkfield/errors.hpp"

namespace checkfield {
namespace {

const cv::Scalar kBoxColor(0, 0, 255);     // red outline
const cv::Scalar kTextColor(0, 0, 255);    // red label text
const cv::Scalar kTextBg(255, 255, 255);   // white plate behind labels
const cv::Scalar kStackBg(255, 255, 255);
const cv::Scalar kDividerColor(0, 0, 0);
constexpr int kGutterWidth = 64;
constexpr int kDividerHeight = 4;
constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;

cv::Rect rounded_rect(const BoundingBox& box, const cv::Mat& image) {
    const int x1 = std::clamp(static_cast<int>(std::floor(box.x1)), 0, image.cols - 1);
    const int y1 = std::clamp(static_cast<int>(std::floor(box.y1)), 0, image.rows - 1);
    const int x2 = std::clamp(static_cast<int>(std::ceil(box.x2)), x1 + 1, image.cols);
    const int y2 = std::clamp(static_cast<int>(std::ceil(box.y2)), y1 + 1, image.rows);
    return cv::Rect(x1, y1, x2 - x1, y2 - y1);
}

void draw_labeled_box(cv::Mat& canvas, const BoundingBox& box, const std::string& label) {
    const cv::Rect rect = rounded_rect(box, canvas);
    cv::rectangle(canvas, rect, kBoxColor, 2);

    // Label text height follows the box height with a 10 px floor.
    const double text_px = std::max(10.0, 0.3 * box.height());
    const double font_scale = text_px / 22.0;  // Hershey simplex is ~22 px at scale 1
    const int thickness = std::max(1, static_cast<int>(std::lround(font_scale)));
    int baseline = 0;
    const cv::Size text_size = cv::getTextSize(label, kFont, font_scale, thickness, &baseline);

    // Anchor at the box's top-left corner, kept inside the image.
    int org_x = rect.x;
    int org_y = rect.y - 4;
    if (org_y - text_size.height < 0) org_y = rect.y + text_size.height + 4;
    org_x = std::clamp(org_x, 0, std::max(0, canvas.cols - text_size.width));
    org_y = std::clamp(org_y, text_size.height, canvas.rows - 1);

    const cv::Rect plate(org_x, org_y - text_size.height, text_size.width,
                         text_size.height + baseline);
    cv::rectangle(canvas, plate & cv::Rect(0, 0, canvas.cols, canvas.rows), kTextBg, cv::FILLED);
    cv::putText(canvas, label, cv::Point(org_x, org_y), kFont, font_scale, kTextColor, thickness,
                cv::LINE_8);
}

void check_in_bounds(const CandidateSet& set, const CheckImage& image) {
    for (const auto& entry : set.entries()) {
        const BoundingBox& box = entry.scored.box;
        if (box.space != CoordSpace::original_space) {
            throw ContractError("render: candidate boxes must be in original_space");
        }
        if (box.x2 > image.width() || box.y2 > image.height()) {
            throw ContractError("render: candidate box exceeds image bounds");
        }
    }
}

}  // namespace

cv::Mat overlay_labels(const CheckImage& image, const CandidateSet& set) {
    check_in_bounds(set, image);
    cv::Mat canvas = image.pixels.clone();
    for (const auto& entry : set.entries()) {
        draw_labeled_box(canvas, entry.scored.box, entry.label);
    }
    return canvas;
}

cv::Mat render_single_box(const CheckImage& image, const BoundingBox& box,
                          const std::string& label) {
    if (box.space != CoordSpace::original_space) {
        throw ContractError("render_single_box: box must be in original_space");
    }
    cv::Mat canvas = image.pixels.clone();
    draw_labeled_box(canvas, box, label);
    return canvas;
}

std::vector<StackPage> compose_stack(const CheckImage& image, const CandidateSet& set,
                                     int page_size) {
    if (page_size < 1 || page_size > kStackPageMax) {
        throw ContractError("compose_stack: page_size must lie in [1,7]");
    }
    check_in_bounds(set, image);

    std::vector<StackPage> pages;
    const auto& entries = set.entries();
    for (std::size_t start = 0; start < entries.size(); start += page_size) {
        const std::size_t end = std::min(entries.size(), start + page_size);

        std::vector<cv::Rect> rects;
        int max_width = 0;
        int total_height = 0;
        for (std::size_t i = start; i < end; ++i) {
            const cv::Rect rect = rounded_rect(entries[i].scored.box, image.pixels);
            rects.push_back(rect);
            max_width = std::max(max_width, rect.width);
            total_height += rect.height;
        }
        const int count = static_cast<int>(end - start);
        const int page_w = kGutterWidth + max_width;
        const int page_h = total_height + kDividerHeight * (count - 1);

        StackPage page;
        page.image = cv::Mat(page_h, page_w, CV_8UC3, kStackBg);
        int y = 0;
        for (std::size_t i = start; i < end; ++i) {
            const cv::Rect& rect = rects[i - start];
            image.pixels(rect).copyTo(
                page.image(cv::Rect(kGutterWidth, y, rect.width, rect.height)));

            const std::string& label = entries[i].label;
            int baseline = 0;
            const cv::Size text_size = cv::getTextSize(label, kFont, 0.5, 1, &baseline);
            const int text_y = y + (rect.height + text_size.height) / 2;
            cv::putText(page.image, label,
                        cv::Point(4, std::clamp(text_y, text_size.height, page_h - 1)), kFont, 0.5,
                        kDividerColor, 1, cv::LINE_8);

            y += rect.height;
            if (i + 1 < end) {
                page.image(cv::Rect(0, y, page_w, kDividerHeight)) = kDividerColor;
                y += kDividerHeight;
            }
            page.entries.push_back(StackPage::Entry{label, entries[i].scored.box});
        }
        pages.push_back(std::move(page));
    }
    return pages;
}

}  // namespace checkfield
