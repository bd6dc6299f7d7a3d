#include "checkfield/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "checkfield/errors.hpp"

namespace checkfield {

std::string_view coord_space_name(CoordSpace space) {
    return space == CoordSpace::model_space ? "model_space" : "original_space";
}

BoundingBox::BoundingBox(double x1, double y1, double x2, double y2, CoordSpace space)
    : x1(x1), y1(y1), x2(x2), y2(y2), space(space) {
    if (x1 < 0.0 || y1 < 0.0) {
        std::ostringstream msg;
        msg << "BoundingBox: negative coordinates [" << x1 << "," << y1 << "," << x2 << "," << y2 << "]";
        throw ContractError(msg.str());
    }
    if (!(x1 < x2) || !(y1 < y2)) {
        std::ostringstream msg;
        msg << "BoundingBox: degenerate box [" << x1 << "," << y1 << "," << x2 << "," << y2 << "]";
        throw ContractError(msg.str());
    }
}

BoundingBox BoundingBox::clamped(double image_width, double image_height) const {
    const double cx1 = std::clamp(x1, 0.0, image_width);
    const double cy1 = std::clamp(y1, 0.0, image_height);
    const double cx2 = std::clamp(x2, 0.0, image_width);
    const double cy2 = std::clamp(y2, 0.0, image_height);
    if (!(cx1 < cx2) || !(cy1 < cy2)) {
        throw ContractError("BoundingBox::clamped: box degenerate after clamping to image bounds");
    }
    return BoundingBox(cx1, cy1, cx2, cy2, space);
}

ScoredBox::ScoredBox(BoundingBox box, double score) : box(box), score(score) {
    if (score < 0.0 || score > 1.0) {
        throw ContractError("ScoredBox: score must lie in [0,1]");
    }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    if (a.space != b.space) {
        throw ContractError("iou: boxes live in different coordinate spaces");
    }
    const double ix1 = std::max(a.x1, b.x1);
    const double iy1 = std::max(a.y1, b.y1);
    const double ix2 = std::min(a.x2, b.x2);
    const double iy2 = std::min(a.y2, b.y2);
    const double iw = std::max(0.0, ix2 - ix1);
    const double ih = std::max(0.0, iy2 - iy1);
    const double inter = iw * ih;
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates, double iou_threshold) {
    if (!(iou_threshold > 0.0) || iou_threshold > 1.0) {
        throw ContractError("nms: iou_threshold must lie in (0,1]");
    }
    std::vector<ScoredBox> sorted = candidates;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
    std::vector<ScoredBox> kept;
    for (const ScoredBox& candidate : sorted) {
        bool suppressed = false;
        for (const ScoredBox& winner : kept) {
            if (iou(candidate.box, winner.box) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(candidate);
    }
    return kept;
}

std::vector<ScoredBox> size_filter(const std::vector<ScoredBox>& candidates,
                                   double image_width, double image_height) {
    if (!(image_width > 0.0) || !(image_height > 0.0)) {
        throw ContractError("size_filter: image dimensions must be positive");
    }
    const double max_area = 0.25 * image_width * image_height;
    const double max_w = 0.30 * image_width;
    const double max_h = 0.30 * image_height;
    std::vector<ScoredBox> kept;
    kept.reserve(candidates.size());
    for (const ScoredBox& candidate : candidates) {
        const double w = candidate.box.width();
        const double h = candidate.box.height();
        if (candidate.box.area() > max_area) continue;
        if (w < 12.0 || h < 12.0) continue;
        if (w > max_w || h > max_h) continue;
        kept.push_back(candidate);
    }
    return kept;
}

BoundingBox micr_widen(const BoundingBox& box, double image_width) {
    if (box.space != CoordSpace::original_space) {
        throw ContractError("micr_widen: box must be in original_space");
    }
    if (!(image_width > 0.0)) {
        throw ContractError("micr_widen: image width must be positive");
    }
    return BoundingBox(0.0, box.y1, image_width, box.y2, box.space);
}

}  // namespace checkfield
