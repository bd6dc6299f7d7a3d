#include "checkfield/replay.hpp"

#include <algorithm>
#include <fstream>

#include "checkfield/errors.hpp"
#include "checkfield/util.hpp"
#include "checkfield/wire.hpp"

namespace checkfield {

using nlohmann::json;

namespace {

constexpr char kSep = '\x1f';

std::string fingerprint_of(std::initializer_list<std::string_view> parts) {
    Fnv1a64 hash;
    bool first = true;
    for (std::string_view part : parts) {
        if (!first) hash.update(&kSep, 1);
        hash.update(part);
        first = false;
    }
    return hash.hex();
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const std::string& part : parts) {
        if (!out.empty()) out += ',';
        out += part;
    }
    return out;
}

std::string join_fields(const std::vector<FieldKind>& fields) {
    std::string out;
    for (FieldKind field : fields) {
        if (!out.empty()) out += ',';
        out += field_kind_name(field);
    }
    return out;
}

}  // namespace

std::string fingerprint_vlm(const std::string& prompt, const cv::Mat& image) {
    return fingerprint_of({"vlm", prompt, image_content_hash(image)});
}

std::string fingerprint_select(FieldKind target, const cv::Mat& overlay) {
    return fingerprint_of({"select", field_kind_name(target), image_content_hash(overlay)});
}

std::string fingerprint_evaluate(FieldKind target, const cv::Mat& render) {
    return fingerprint_of({"evaluate", field_kind_name(target), image_content_hash(render)});
}

std::string fingerprint_ocr(const std::vector<std::string>& labels, const cv::Mat& page) {
    return fingerprint_of({"ocr", join(labels), image_content_hash(page)});
}

std::string fingerprint_ner(const std::vector<FieldKind>& fields, const cv::Mat& image) {
    return fingerprint_of({"ner", join_fields(fields), image_content_hash(image)});
}

ReplayScript ReplayScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("ReplayScript::load: cannot open '" + path.string() + "'");
    }
    json body;
    try {
        in >> body;
    } catch (const json::exception& e) {
        throw InputError("ReplayScript::load: '" + path.string() + "' is not valid JSON: " +
                         e.what());
    }
    if (!body.is_object() || !body.contains("responses") || !body["responses"].is_array()) {
        throw InputError("ReplayScript::load: '" + path.string() +
                         "' must be {scenario, responses: [...]}");
    }
    ReplayScript script(body.value("scenario", std::string{}));
    for (const json& item : body["responses"]) {
        if (!item.is_object() || !item.contains("fingerprint") || !item.contains("kind") ||
            !item.contains("response")) {
            throw InputError("ReplayScript::load: each response needs fingerprint, kind, response");
        }
        script.add(item["fingerprint"].get<std::string>(),
                   Entry{item["kind"].get<std::string>(), item.value("note", std::string{}),
                         item["response"]});
    }
    return script;
}

ReplayScript ReplayScript::load_any(const std::filesystem::path& path) {
    if (!std::filesystem::is_directory(path)) {
        return load(path);
    }
    std::vector<std::filesystem::path> files;
    for (const auto& item : std::filesystem::directory_iterator(path)) {
        if (item.is_regular_file() && item.path().extension() == ".json") {
            files.push_back(item.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw InputError("ReplayScript::load_any: no *.json scripts under '" + path.string() + "'");
    }
    ReplayScript merged("merged:" + path.filename().string());
    for (const auto& file : files) {
        merged.merge(load(file));
    }
    return merged;
}

void ReplayScript::add(const std::string& fingerprint, Entry entry) {
    if (responses_.count(fingerprint)) {
        throw InputError("ReplayScript: duplicate fingerprint '" + fingerprint + "'");
    }
    responses_.emplace(fingerprint, std::move(entry));
    order_.push_back(fingerprint);
}

void ReplayScript::merge(const ReplayScript& other) {
    for (const std::string& fingerprint : other.order_) {
        add(fingerprint, other.responses_.at(fingerprint));
    }
}

json ReplayScript::to_json() const {
    json responses = json::array();
    for (const std::string& fingerprint : order_) {
        const Entry& entry = responses_.at(fingerprint);
        responses.push_back(json{{"fingerprint", fingerprint},
                                 {"kind", entry.kind},
                                 {"note", entry.note},
                                 {"response", entry.response}});
    }
    return json{{"scenario", scenario_}, {"responses", std::move(responses)}};
}

void ReplayScript::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw InputError("ReplayScript::save: cannot write '" + path.string() + "'");
    }
    out << to_json().dump(2) << '\n';
}

const ReplayScript::Entry& ReplayScript::lookup(const std::string& fingerprint,
                                                const std::string& context) const {
    auto it = responses_.find(fingerprint);
    if (it == responses_.end()) {
        throw MissingFixtureError("replay script '" + scenario_ + "' has no response for " +
                                  context + " (fingerprint " + fingerprint + ")");
    }
    return it->second;
}

std::vector<ScoredBox> ReplayVlm::propose_raw(const VlmRequest& request) {
    const std::string fp = fingerprint_vlm(request.prompt, request.image);
    const auto& entry = script_->lookup(fp, "vlm prompt '" + request.prompt + "'");
    return wire::scored_boxes_from_json(entry.response, 1.0, request.image.cols,
                                        request.image.rows, CoordSpace::model_space);
}

std::string ReplayMllm::select_label_raw(const cv::Mat& overlay, FieldKind target,
                                         const std::vector<std::string>& live_labels,
                                         const std::vector<std::string>& /*memory*/) {
    const std::string fp = fingerprint_select(target, overlay);
    const auto& entry = script_->lookup(
        fp, "select target '" + std::string(field_kind_name(target)) + "' with " +
                std::to_string(live_labels.size()) + " live labels");
    return wire::label_from_json(entry.response);
}

MllmVerdict ReplayMllm::evaluate_raw(const cv::Mat& single_box_render, FieldKind target) {
    const std::string fp = fingerprint_evaluate(target, single_box_render);
    const auto& entry =
        script_->lookup(fp, "evaluate target '" + std::string(field_kind_name(target)) + "'");
    return wire::verdict_from_json(entry.response);
}

std::map<std::string, std::string> ReplayMllm::ocr_stack_raw(
    const cv::Mat& page, const std::vector<std::string>& labels) {
    const std::string fp = fingerprint_ocr(labels, page);
    std::string joined;
    for (const std::string& label : labels) {
        if (!joined.empty()) joined += ',';
        joined += label;
    }
    const auto& entry = script_->lookup(fp, "ocr of labels [" + joined + "]");
    return wire::ocr_texts_from_json(entry.response);
}

std::map<FieldKind, std::optional<std::string>> ReplayMllm::ner_raw(
    const CheckImage& image, const std::vector<FieldKind>& fields) {
    const std::string fp = fingerprint_ner(fields, image.pixels);
    const auto& entry = script_->lookup(fp, "ner of check '" + image.source_id + "'");
    return wire::ner_fields_from_json(entry.response);
}

std::vector<ScoredBox> RecordingVlm::propose_raw(const VlmRequest& request) {
    std::vector<ScoredBox> boxes = inner_.propose_raw(request);
    script_.add(fingerprint_vlm(request.prompt, request.image),
                ReplayScript::Entry{"vlm", "proposals for prompt '" + request.prompt + "'",
                                    wire::scored_boxes_to_json(boxes, 1.0)});
    return boxes;
}

std::string RecordingMllm::select_label_raw(const cv::Mat& overlay, FieldKind target,
                                            const std::vector<std::string>& live_labels,
                                            const std::vector<std::string>& memory) {
    std::string label = inner_.select_label_raw(overlay, target, live_labels, memory);
    script_.add(fingerprint_select(target, overlay),
                ReplayScript::Entry{"select",
                                    "label choice for " + std::string(field_kind_name(target)) +
                                        " among " + std::to_string(live_labels.size()),
                                    wire::label_to_json(label)});
    return label;
}

MllmVerdict RecordingMllm::evaluate_raw(const cv::Mat& single_box_render, FieldKind target) {
    MllmVerdict verdict = inner_.evaluate_raw(single_box_render, target);
    script_.add(fingerprint_evaluate(target, single_box_render),
                ReplayScript::Entry{"evaluate",
                                    "verdict for " + std::string(field_kind_name(target)),
                                    wire::verdict_to_json(verdict)});
    return verdict;
}

std::map<std::string, std::string> RecordingMllm::ocr_stack_raw(
    const cv::Mat& page, const std::vector<std::string>& labels) {
    std::map<std::string, std::string> texts = inner_.ocr_stack_raw(page, labels);
    script_.add(fingerprint_ocr(labels, page),
                ReplayScript::Entry{"ocr", "stack page of " + std::to_string(labels.size()),
                                    wire::ocr_texts_to_json(texts)});
    return texts;
}

std::map<FieldKind, std::optional<std::string>> RecordingMllm::ner_raw(
    const CheckImage& image, const std::vector<FieldKind>& fields) {
    std::map<FieldKind, std::optional<std::string>> reply = inner_.ner_raw(image, fields);
    script_.add(fingerprint_ner(fields, image.pixels),
                ReplayScript::Entry{"ner", "reference texts for '" + image.source_id + "'",
                                    wire::ner_fields_to_json(reply)});
    return reply;
}

}  // namespace checkfield
