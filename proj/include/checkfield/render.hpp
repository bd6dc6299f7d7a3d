#pragma once

#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "checkfield/candidate_set.hpp"
#include "checkfield/image.hpp"

namespace checkfield {

// One page of vertically stacked candidate crops, labels in a left gutter.
// A page carries at most kStackPageMax entries; entry order matches the
// candidate order of the set the pages were composed from.
struct StackPage {
    struct Entry {
        std::string label;
        BoundingBox source_box;  // original_space
    };

    cv::Mat image;
    std::vector<Entry> entries;
};

inline constexpr int kStackPageMax = 7;

// Draws every candidate box plus its label onto a copy of the check. Fixed
// colors and font; identical inputs produce byte-identical pixels.
cv::Mat overlay_labels(const CheckImage& image, const CandidateSet& set);

// Same style as overlay_labels, restricted to one candidate. Used to show the
// evaluator exactly the box under review.
cv::Mat render_single_box(const CheckImage& image, const BoundingBox& box,
                          const std::string& label);

// Crops every candidate and stacks the crops top-to-bottom in candidate
// order, splitting into pages of up to `page_size` crops.
std::vector<StackPage> compose_stack(const CheckImage& image, const CandidateSet& set,
                                     int page_size = kStackPageMax);

}  // namespace checkfield
