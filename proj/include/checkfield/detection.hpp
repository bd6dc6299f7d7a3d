#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "checkfield/field_kind.hpp"
#include "checkfield/geometry.hpp"
#include "checkfield/text_metrics.hpp"

namespace checkfield {

// Final per-field answer with enough provenance to audit how it was chosen.
struct FieldDetection {
    struct Provenance {
        int module = 0;               // 1 = overlay loop, 2 = OCR matching
        int iterations = 0;           // evaluator calls spent on this field
        std::string selected_label;   // candidate label that won
        std::optional<CerScore> cer;  // present for module-2 detections
    };

    FieldKind field = FieldKind::signature;
    BoundingBox box;  // original_space
    Provenance provenance;

    FieldDetection(FieldKind field, BoundingBox box, Provenance provenance);
};

enum class FieldStatus { detected, undetected, error };

std::string_view field_status_name(FieldStatus status);

struct FieldResult {
    FieldStatus status = FieldStatus::undetected;
    std::optional<FieldDetection> detection;
    std::string note;  // why undetected / what failed
};

// Everything the engine produced for one check.
struct DetectionResult {
    std::string source_id;
    int width = 0;
    int height = 0;
    std::map<FieldKind, FieldResult> fields;
    // Reference texts from NER, kept for evaluation and debugging.
    std::map<FieldKind, std::optional<std::string>> ner;

    nlohmann::json to_json() const;
    static DetectionResult from_json(const nlohmann::json& body);
};

}  // namespace checkfield
