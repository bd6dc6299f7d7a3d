#include "checkfield/wire.hpp"

#include <algorithm>

#include "checkfield/errors.hpp"

namespace checkfield::wire {

using nlohmann::json;

json scored_boxes_to_json(const std::vector<ScoredBox>& boxes, double coord_divisor) {
    json out_boxes = json::array();
    for (const ScoredBox& scored : boxes) {
        out_boxes.push_back(json{
            {"box",
             {scored.box.x1 / coord_divisor, scored.box.y1 / coord_divisor,
              scored.box.x2 / coord_divisor, scored.box.y2 / coord_divisor}},
            {"score", scored.score},
        });
    }
    return json{{"boxes", std::move(out_boxes)}};
}

std::vector<ScoredBox> scored_boxes_from_json(const json& body, double coord_scale,
                                              double image_width, double image_height,
                                              CoordSpace space) {
    if (!body.is_object() || !body.contains("boxes") || !body["boxes"].is_array()) {
        throw MalformedResponseError("vlm response: expected object with a 'boxes' array");
    }
    std::vector<ScoredBox> out;
    for (const json& entry : body["boxes"]) {
        if (!entry.is_object() || !entry.contains("box") || !entry.contains("score") ||
            !entry["box"].is_array() || entry["box"].size() != 4) {
            throw MalformedResponseError("vlm response: each entry needs 'box' [x1,y1,x2,y2] and 'score'");
        }
        double coords[4];
        for (int i = 0; i < 4; ++i) {
            if (!entry["box"][i].is_number()) {
                throw MalformedResponseError("vlm response: box coordinates must be numbers");
            }
            coords[i] = entry["box"][i].get<double>() * coord_scale;
        }
        if (!entry["score"].is_number()) {
            throw MalformedResponseError("vlm response: score must be a number");
        }
        const double score = entry["score"].get<double>();
        if (score < 0.0 || score > 1.0) {
            throw MalformedResponseError("vlm response: score outside [0,1]");
        }
        // Model outputs can overshoot the raster; clamp first, drop what
        // degenerates.
        const double x1 = std::clamp(coords[0], 0.0, image_width);
        const double y1 = std::clamp(coords[1], 0.0, image_height);
        const double x2 = std::clamp(coords[2], 0.0, image_width);
        const double y2 = std::clamp(coords[3], 0.0, image_height);
        if (!(x1 < x2) || !(y1 < y2)) continue;
        out.push_back(ScoredBox(BoundingBox(x1, y1, x2, y2, space), score));
    }
    return out;
}

json verdict_to_json(const MllmVerdict& verdict) {
    return json{{"grade", verdict.passed() ? "Pass" : "Fail"},
                {"explanation", verdict.explanation}};
}

MllmVerdict verdict_from_json(const json& body) {
    if (!body.is_object() || !body.contains("grade") || !body["grade"].is_string()) {
        throw MalformedResponseError("evaluate response: expected {\"grade\", \"explanation\"}");
    }
    std::string grade = body["grade"].get<std::string>();
    std::transform(grade.begin(), grade.end(), grade.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    MllmVerdict verdict;
    if (grade == "pass") {
        verdict.grade = MllmVerdict::Grade::pass;
    } else if (grade == "fail") {
        verdict.grade = MllmVerdict::Grade::fail;
    } else {
        throw MalformedResponseError("evaluate response: grade must be Pass or Fail, got '" +
                                     body["grade"].get<std::string>() + "'");
    }
    if (body.contains("explanation") && body["explanation"].is_string()) {
        verdict.explanation = body["explanation"].get<std::string>();
    }
    return verdict;
}

json label_to_json(const std::string& label) {
    return json{{"label", label}};
}

std::string label_from_json(const json& body) {
    if (!body.is_object() || !body.contains("label") || !body["label"].is_string()) {
        throw MalformedResponseError("select response: expected {\"label\": \"O-k\"}");
    }
    return body["label"].get<std::string>();
}

json ocr_texts_to_json(const std::map<std::string, std::string>& texts) {
    return json{{"texts", texts}};
}

std::map<std::string, std::string> ocr_texts_from_json(const json& body) {
    if (!body.is_object() || !body.contains("texts") || !body["texts"].is_object()) {
        throw MalformedResponseError("ocr response: expected {\"texts\": {label: text}}");
    }
    std::map<std::string, std::string> out;
    for (const auto& [label, text] : body["texts"].items()) {
        if (!text.is_string()) {
            throw MalformedResponseError("ocr response: text for '" + label + "' must be a string");
        }
        out[label] = text.get<std::string>();
    }
    return out;
}

json ner_fields_to_json(const std::map<FieldKind, std::optional<std::string>>& fields) {
    json entries = json::object();
    for (const auto& [field, text] : fields) {
        if (text.has_value()) {
            entries[std::string(field_kind_name(field))] = *text;
        } else {
            entries[std::string(field_kind_name(field))] = nullptr;
        }
    }
    return json{{"fields", std::move(entries)}};
}

std::map<FieldKind, std::optional<std::string>> ner_fields_from_json(const json& body) {
    if (!body.is_object() || !body.contains("fields") || !body["fields"].is_object()) {
        throw MalformedResponseError("ner response: expected {\"fields\": {name: text|null}}");
    }
    std::map<FieldKind, std::optional<std::string>> out;
    for (const auto& [name, text] : body["fields"].items()) {
        const std::optional<FieldKind> field = parse_field_kind(name);
        if (!field.has_value()) continue;  // unknown names are ignored
        if (text.is_null()) {
            out[*field] = std::nullopt;
        } else if (text.is_string()) {
            out[*field] = text.get<std::string>();
        } else {
            throw MalformedResponseError("ner response: field '" + name +
                                         "' must be a string or null");
        }
    }
    return out;
}

}  // namespace checkfield::wire
