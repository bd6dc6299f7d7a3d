#include "checkfield/detection.hpp"

#include "checkfield/errors.hpp"

namespace checkfield {

using nlohmann::json;

FieldDetection::FieldDetection(FieldKind field, BoundingBox box, Provenance provenance)
    : field(field), box(box), provenance(std::move(provenance)) {
    if (box.space != CoordSpace::original_space) {
        throw ContractError("FieldDetection: box must be in original_space");
    }
    if (this->provenance.module == 2 && !this->provenance.cer.has_value()) {
        throw ContractError("FieldDetection: module-2 detections must carry a CER");
    }
}

std::string_view field_status_name(FieldStatus status) {
    switch (status) {
        case FieldStatus::detected: return "detected";
        case FieldStatus::undetected: return "undetected";
        case FieldStatus::error: return "error";
    }
    throw ContractError("field_status_name: invalid status");
}

json DetectionResult::to_json() const {
    json field_entries = json::array();
    for (FieldKind kind : all_field_kinds()) {
        auto it = fields.find(kind);
        if (it == fields.end()) continue;
        const FieldResult& result = it->second;
        json entry{{"kind", field_kind_name(kind)},
                   {"status", field_status_name(result.status)}};
        if (!result.note.empty()) entry["note"] = result.note;
        if (result.detection.has_value()) {
            const FieldDetection& det = *result.detection;
            entry["box"] = {det.box.x1, det.box.y1, det.box.x2, det.box.y2};
            entry["module"] = det.provenance.module;
            entry["iterations"] = det.provenance.iterations;
            entry["selected_label"] = det.provenance.selected_label;
            if (det.provenance.cer.has_value()) {
                entry["cer"] = det.provenance.cer->value;
            } else {
                entry["cer"] = nullptr;
            }
        }
        field_entries.push_back(std::move(entry));
    }

    json ner_entries = json::object();
    for (const auto& [kind, text] : ner) {
        if (text.has_value()) {
            ner_entries[std::string(field_kind_name(kind))] = *text;
        } else {
            ner_entries[std::string(field_kind_name(kind))] = nullptr;
        }
    }

    return json{{"source_id", source_id},
                {"image", json{{"width", width}, {"height", height}}},
                {"fields", std::move(field_entries)},
                {"ner", std::move(ner_entries)}};
}

DetectionResult DetectionResult::from_json(const json& body) {
    if (!body.is_object() || !body.contains("source_id") || !body.contains("fields")) {
        throw InputError("detection json: expected {source_id, image, fields, ner}");
    }
    DetectionResult result;
    result.source_id = body["source_id"].get<std::string>();
    if (body.contains("image") && body["image"].is_object()) {
        result.width = body["image"].value("width", 0);
        result.height = body["image"].value("height", 0);
    }
    for (const json& entry : body["fields"]) {
        const std::optional<FieldKind> kind = parse_field_kind(entry.value("kind", ""));
        if (!kind.has_value()) {
            throw InputError("detection json: unknown field kind '" + entry.value("kind", "") +
                             "'");
        }
        FieldResult field_result;
        const std::string status = entry.value("status", "");
        if (status == "detected") {
            field_result.status = FieldStatus::detected;
        } else if (status == "undetected") {
            field_result.status = FieldStatus::undetected;
        } else if (status == "error") {
            field_result.status = FieldStatus::error;
        } else {
            throw InputError("detection json: bad status '" + status + "'");
        }
        field_result.note = entry.value("note", "");
        if (entry.contains("box")) {
            const json& box = entry["box"];
            if (!box.is_array() || box.size() != 4) {
                throw InputError("detection json: box must be [x1,y1,x2,y2]");
            }
            FieldDetection::Provenance provenance;
            provenance.module = entry.value("module", 0);
            provenance.iterations = entry.value("iterations", 0);
            provenance.selected_label = entry.value("selected_label", "");
            if (entry.contains("cer") && !entry["cer"].is_null()) {
                provenance.cer = CerScore{entry["cer"].get<double>(), 1};
            }
            field_result.detection = FieldDetection(
                *kind,
                BoundingBox(box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                            box[3].get<double>(), CoordSpace::original_space),
                std::move(provenance));
        }
        result.fields.emplace(*kind, std::move(field_result));
    }
    if (body.contains("ner") && body["ner"].is_object()) {
        for (const auto& [name, text] : body["ner"].items()) {
            const std::optional<FieldKind> kind = parse_field_kind(name);
            if (!kind.has_value()) continue;
            if (text.is_null()) {
                result.ner[*kind] = std::nullopt;
            } else {
                result.ner[*kind] = text.get<std::string>();
            }
        }
    }
    return result;
}

}  // namespace checkfield
