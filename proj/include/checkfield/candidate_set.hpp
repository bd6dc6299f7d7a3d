#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "checkfield/geometry.hpp"

namespace checkfield {

// Scored, filtered proposal boxes for one check and one detector prompt.
// Boxes are held in descending-score order and labeled "O-1".."O-n" in that
// order; labels stay attached to their boxes when a subset is taken.
class CandidateSet {
public:
    struct Entry {
        std::string label;
        ScoredBox scored;
    };

    // Sorts by descending score (stable) and assigns labels.
    static CandidateSet make(std::string prompt, std::vector<ScoredBox> boxes,
                             double image_width, double image_height);

    const std::string& prompt() const { return prompt_; }
    double image_width() const { return image_width_; }
    double image_height() const { return image_height_; }

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    std::vector<std::string> labels() const;
    bool contains(const std::string& label) const;
    const Entry& at(const std::string& label) const;  // ContractError if absent

    // Same set minus one label; the other labels are untouched.
    CandidateSet without(const std::string& label) const;

private:
    CandidateSet() = default;

    std::string prompt_;
    double image_width_ = 0.0;
    double image_height_ = 0.0;
    std::vector<Entry> entries_;
};

}  // namespace checkfield
