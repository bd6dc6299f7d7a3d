#pragma once

#include <string_view>
#include <vector>

namespace checkfield {

// Boxes live either on the padded detector input (model_space, 960x960) or on
// the source check image (original_space). Mixing spaces is a contract error.
enum class CoordSpace { model_space, original_space };

std::string_view coord_space_name(CoordSpace space);

// Axis-aligned pixel rectangle, top-left (x1,y1) / bottom-right (x2,y2).
// Construction rejects degenerate or negative geometry.
struct BoundingBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;
    CoordSpace space = CoordSpace::original_space;

    BoundingBox(double x1, double y1, double x2, double y2, CoordSpace space);

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }

    // Clamps to [0,w]x[0,h]; throws ContractError if nothing is left.
    BoundingBox clamped(double image_width, double image_height) const;

    bool operator==(const BoundingBox& other) const = default;
};

struct ScoredBox {
    BoundingBox box;
    double score = 0.0;  // confidence in [0,1]

    ScoredBox(BoundingBox box, double score);

    bool operator==(const ScoredBox& other) const = default;
};

// Intersection-over-union of two boxes in the same coordinate space.
double iou(const BoundingBox& a, const BoundingBox& b);

// Greedy non-maximum suppression: keep the highest-scoring box, drop every
// remaining box whose IoU with a kept box is >= iou_threshold. Output is
// sorted by descending score (ties keep input order).
std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates, double iou_threshold);

// Drops boxes that are too large relative to the image (>25% of the area or
// >30% of either dimension) or too small (<12 px on either side). Order is
// preserved; applying the filter twice changes nothing.
std::vector<ScoredBox> size_filter(const std::vector<ScoredBox>& candidates,
                                   double image_width, double image_height);

// MICR boxes keep only their vertical extent; the horizontal span is widened
// to the full check width. Idempotent.
BoundingBox micr_widen(const BoundingBox& box, double image_width);

}  // namespace checkfield
