#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "checkfield/backend.hpp"
#include "checkfield/field_kind.hpp"
#include "checkfield/geometry.hpp"

namespace checkfield::wire {

// JSON schemas shared by the HTTP protocol and the replay fixture format.
// Boxes are encoded as {"box": [x1,y1,x2,y2], "score": s}; `coord_scale`
// says what one unit means (1.0 for pixel coordinates, the raster side for
// normalized [0,1] coordinates).

nlohmann::json scored_boxes_to_json(const std::vector<ScoredBox>& boxes, double coord_divisor);

// Lenient on geometry: boxes degenerate after clamping to the raster are
// dropped, out-of-range scores are a malformed response.
std::vector<ScoredBox> scored_boxes_from_json(const nlohmann::json& body, double coord_scale,
                                              double image_width, double image_height,
                                              CoordSpace space);

nlohmann::json verdict_to_json(const MllmVerdict& verdict);
MllmVerdict verdict_from_json(const nlohmann::json& body);

nlohmann::json label_to_json(const std::string& label);
std::string label_from_json(const nlohmann::json& body);

nlohmann::json ocr_texts_to_json(const std::map<std::string, std::string>& texts);
std::map<std::string, std::string> ocr_texts_from_json(const nlohmann::json& body);

nlohmann::json ner_fields_to_json(const std::map<FieldKind, std::optional<std::string>>& fields);
std::map<FieldKind, std::optional<std::string>> ner_fields_from_json(const nlohmann::json& body);

}  // namespace checkfield::wire
