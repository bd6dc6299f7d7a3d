#include "checkfield/candidate_set.hpp"

#include <algorithm>

#include "checkfield/errors.hpp"

namespace checkfield {

CandidateSet CandidateSet::make(std::string prompt, std::vector<ScoredBox> boxes,
                                double image_width, double image_height) {
    if (!(image_width > 0.0) || !(image_height > 0.0)) {
        throw ContractError("CandidateSet: image dimensions must be positive");
    }
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
    CandidateSet set;
    set.prompt_ = std::move(prompt);
    set.image_width_ = image_width;
    set.image_height_ = image_height;
    set.entries_.reserve(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        set.entries_.push_back(Entry{"O-" + std::to_string(i + 1), boxes[i]});
    }
    return set;
}

std::vector<std::string> CandidateSet::labels() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const Entry& entry : entries_) out.push_back(entry.label);
    return out;
}

bool CandidateSet::contains(const std::string& label) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& entry) { return entry.label == label; });
}

const CandidateSet::Entry& CandidateSet::at(const std::string& label) const {
    for (const Entry& entry : entries_) {
        if (entry.label == label) return entry;
    }
    throw ContractError("CandidateSet::at: no candidate labeled '" + label + "'");
}

CandidateSet CandidateSet::without(const std::string& label) const {
    if (!contains(label)) {
        throw ContractError("CandidateSet::without: no candidate labeled '" + label + "'");
    }
    CandidateSet out = *this;
    out.entries_.erase(std::remove_if(out.entries_.begin(), out.entries_.end(),
                                      [&](const Entry& entry) { return entry.label == label; }),
                       out.entries_.end());
    return out;
}

}  // namespace checkfield
