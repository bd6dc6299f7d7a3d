#include "checkfield/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <vector>

#include "checkfield/errors.hpp"

namespace checkfield {
namespace {

// Decodes UTF-8 into code points; an invalid byte stands for itself.
std::vector<uint32_t> decode_utf8(std::string_view text) {
    std::vector<uint32_t> points;
    points.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto byte = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        uint32_t cp = byte;
        if ((byte & 0x80u) == 0x00u) {
            len = 1;
        } else if ((byte & 0xE0u) == 0xC0u) {
            len = 2;
            cp = byte & 0x1Fu;
        } else if ((byte & 0xF0u) == 0xE0u) {
            len = 3;
            cp = byte & 0x0Fu;
        } else if ((byte & 0xF8u) == 0xF0u) {
            len = 4;
            cp = byte & 0x07u;
        } else {
            points.push_back(byte);
            ++i;
            continue;
        }
        if (i + len > text.size()) {
            points.push_back(byte);
            ++i;
            continue;
        }
        bool valid = true;
        uint32_t decoded = cp;
        for (std::size_t k = 1; k < len; ++k) {
            const auto cont = static_cast<unsigned char>(text[i + k]);
            if ((cont & 0xC0u) != 0x80u) {
                valid = false;
                break;
            }
            decoded = (decoded << 6) | (cont & 0x3Fu);
        }
        if (!valid) {
            points.push_back(byte);
            ++i;
            continue;
        }
        points.push_back(decoded);
        i += len;
    }
    return points;
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::size_t edit_distance(std::string_view reference, std::string_view hypothesis) {
    const std::vector<uint32_t> ref = decode_utf8(reference);
    const std::vector<uint32_t> hyp = decode_utf8(hypothesis);
    if (ref.empty()) return hyp.size();
    if (hyp.empty()) return ref.size();

    // Two-row dynamic program over code points.
    std::vector<std::size_t> prev(hyp.size() + 1);
    std::vector<std::size_t> curr(hyp.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= ref.size(); ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= hyp.size(); ++j) {
            const std::size_t sub_cost = ref[i - 1] == hyp[j - 1] ? 0 : 1;
            curr[j] = std::min({prev[j] + 1,             // deletion
                                curr[j - 1] + 1,          // insertion
                                prev[j - 1] + sub_cost}); // substitution / match
        }
        std::swap(prev, curr);
    }
    return prev[hyp.size()];
}

CerScore cer(std::string_view reference, std::string_view hypothesis) {
    const std::size_t n_ref = decode_utf8(reference).size();
    if (n_ref == 0) {
        throw UndefinedCerError("cer: reference text is empty");
    }
    const std::size_t distance = edit_distance(reference, hypothesis);
    return CerScore{static_cast<double>(distance) / static_cast<double>(n_ref), n_ref};
}

std::string normalize(std::string_view text, bool lowercase) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(lowercase ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c);
    }
    return out;
}

}  // namespace checkfield
