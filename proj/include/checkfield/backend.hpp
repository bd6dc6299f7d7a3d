#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "checkfield/field_kind.hpp"
#include "checkfield/geometry.hpp"
#include "checkfield/image.hpp"

namespace checkfield {

struct VlmRequest {
    cv::Mat image;  // model-space raster, 960x960x3
    std::string prompt;
    double score_threshold = 0.01;
    int max_detections = 3600;
};

struct MllmVerdict {
    enum class Grade { pass, fail };

    Grade grade = Grade::fail;
    std::string explanation;

    bool passed() const { return grade == Grade::pass; }
};

// Open-vocabulary detector. Implementations return boxes in model_space
// pixels; the public entry point enforces the request contract (threshold,
// max_detections, clamping to the raster).
class VlmBackend {
public:
    virtual ~VlmBackend() = default;

    std::vector<ScoredBox> propose(const VlmRequest& request);

    // Implementation surface; callers use propose().
    virtual std::vector<ScoredBox> propose_raw(const VlmRequest& request) = 0;
};

// Multimodal LLM used four ways: pick a label from an overlay, grade a single
// rendered box, OCR a stacked page, and extract reference texts (NER). The
// non-virtual entry points validate arguments and responses so every
// implementation honors the same contract.
class MllmBackend {
public:
    virtual ~MllmBackend() = default;

    // Returns one of live_labels; anything else from the implementation is a
    // ProtocolViolationError. `memory` lists labels already rejected.
    std::string select_label(const cv::Mat& overlay, FieldKind target,
                             const std::vector<std::string>& live_labels,
                             const std::vector<std::string>& memory);

    // Grades a render showing exactly one box. Fail must carry an explanation.
    MllmVerdict evaluate(const cv::Mat& single_box_render, FieldKind target);

    // OCR of one stacked page. Labels missing from the first reply are
    // re-requested once; a still-incomplete result is an OcrIncompleteError.
    // Empty strings are valid OCR output.
    std::map<std::string, std::string> ocr_stack(const cv::Mat& page,
                                                 const std::vector<std::string>& labels);

    // Reference-text extraction from the full check. Every requested field
    // comes back either with text or explicitly absent.
    std::map<FieldKind, std::optional<std::string>> ner(const CheckImage& image,
                                                        const std::vector<FieldKind>& fields);

    // Implementation surface; callers use the validated entry points above.
    virtual std::string select_label_raw(const cv::Mat& overlay, FieldKind target,
                                         const std::vector<std::string>& live_labels,
                                         const std::vector<std::string>& memory) = 0;
    virtual MllmVerdict evaluate_raw(const cv::Mat& single_box_render, FieldKind target) = 0;
    virtual std::map<std::string, std::string> ocr_stack_raw(
        const cv::Mat& page, const std::vector<std::string>& labels) = 0;
    virtual std::map<FieldKind, std::optional<std::string>> ner_raw(
        const CheckImage& image, const std::vector<FieldKind>& fields) = 0;
};

}  // namespace checkfield
