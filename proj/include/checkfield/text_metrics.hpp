#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace checkfield {

struct CerScore {
    double value = 0.0;     // edit distance / reference length, may exceed 1
    std::size_t n_ref = 0;  // reference length in code points, >= 1

    bool operator==(const CerScore& other) const = default;
};

// Minimal number of substitutions, deletions, and insertions turning
// `hypothesis` into `reference`. Unicode is compared at code-point
// granularity; grapheme clusters are not joined.
std::size_t edit_distance(std::string_view reference, std::string_view hypothesis);

// edit_distance / |reference|. Throws UndefinedCerError on an empty reference.
CerScore cer(std::string_view reference, std::string_view hypothesis);

// Trims surrounding whitespace and collapses internal runs to a single space.
// Case and punctuation are preserved unless `lowercase` is set.
std::string normalize(std::string_view text, bool lowercase = false);

}  // namespace checkfield
