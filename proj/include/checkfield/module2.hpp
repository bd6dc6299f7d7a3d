#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "checkfield/backend.hpp"
#include "checkfield/candidate_set.hpp"
#include "checkfield/config.hpp"
#include "checkfield/detection.hpp"
#include "checkfield/image.hpp"
#include "checkfield/module1.hpp"
#include "checkfield/text_metrics.hpp"

namespace checkfield {

// Reference texts from NER, normalized; absent fields are explicitly marked.
struct ReferenceSet {
    std::map<FieldKind, std::optional<std::string>> entries;

    bool has_text(FieldKind field) const {
        auto it = entries.find(field);
        return it != entries.end() && it->second.has_value() && !it->second->empty();
    }
};

// OCR texts of the stacked candidate crops, consolidated across pages in
// candidate order.
struct StackTexts {
    std::vector<std::pair<std::string, std::string>> entries;  // (label, normalized text)

    std::vector<std::string> labels() const;
    const std::string& text_of(const std::string& label) const;  // ContractError if absent
};

// Per-field CER of every stacked candidate against the field's reference.
struct CerMatrix {
    using Row = std::vector<std::pair<std::string, CerScore>>;  // candidate order
    std::map<FieldKind, Row> rows;
};

struct Survivor {
    std::string label;
    CerScore cer;
};

// Cross product of present reference fields and all stacked candidates.
// Fields whose reference is absent or empty get no row.
CerMatrix build_cer_matrix(const ReferenceSet& refs, const StackTexts& texts);

// Candidates strictly below the CER threshold, sorted ascending by CER
// (candidate order breaks ties). Empty means the field goes undetected.
std::vector<Survivor> filter_candidates(const CerMatrix::Row& row, double cer_threshold);

// Location check over the survivors. A single survivor is taken as-is; with
// several, each is rendered alone in ascending-CER order and graded by the
// evaluator (at most t_max grades). Among passing candidates the smallest CER
// wins, ties broken by smallest box area. Evaluation stops once no later
// survivor could beat the best pass.
std::optional<FieldDetection> select_detection(const CheckImage& image, FieldKind field,
                                               const std::vector<Survivor>& survivors,
                                               const CandidateSet& candidates, MllmBackend& mllm,
                                               int t_max);

// Runs one detector prompt: propose on the model raster, NMS, size filters,
// then map the survivors back onto the original image.
CandidateSet vlm_candidates(const CheckImage& image, const cv::Mat& model,
                            const PadTransform& transform, const std::string& prompt,
                            VlmBackend& vlm, const EngineConfig& config);

// Consolidated OCR over all stack pages of a candidate set.
StackTexts ocr_candidates(const CheckImage& image, const CandidateSet& set, MllmBackend& mllm,
                          const EngineConfig& config);

// Full per-check run: three detector prompts, the signature loop, NER, the
// stacked OCR + CER matching for the eight text fields, and MICR widening.
// Failures are isolated per field; only transport-level outages propagate.
struct PipelineOutput {
    DetectionResult result;
    std::optional<LoopOutcome> signature_loop;  // transcript for debugging
};

PipelineOutput detect_fields(const CheckImage& image, VlmBackend& vlm, MllmBackend& mllm,
                             const EngineConfig& config);

}  // namespace checkfield
