#include "checkfield/backend.hpp"

#include <algorithm>

#include "checkfield/errors.hpp"

namespace checkfield {

std::vector<ScoredBox> VlmBackend::propose(const VlmRequest& request) {
    if (request.image.empty()) {
        throw ContractError("vlm_propose: empty image");
    }
    if (request.max_detections < 1) {
        throw ContractError("vlm_propose: max_detections must be >= 1");
    }
    if (!(request.score_threshold > 0.0) || request.score_threshold >= 1.0) {
        throw ContractError("vlm_propose: score_threshold must lie in (0,1)");
    }

    std::vector<ScoredBox> raw = propose_raw(request);

    // Enforce the contract regardless of what the implementation sent back.
    std::vector<ScoredBox> boxes;
    boxes.reserve(raw.size());
    for (const ScoredBox& scored : raw) {
        if (scored.score < request.score_threshold) continue;
        boxes.push_back(scored);
    }
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
    if (boxes.size() > static_cast<std::size_t>(request.max_detections)) {
        boxes.erase(boxes.begin() + request.max_detections, boxes.end());
    }
    return boxes;
}

std::string MllmBackend::select_label(const cv::Mat& overlay, FieldKind target,
                                      const std::vector<std::string>& live_labels,
                                      const std::vector<std::string>& memory) {
    if (live_labels.empty()) {
        throw ContractError("select_label: live_labels must be non-empty");
    }
    for (const std::string& rejected : memory) {
        if (std::find(live_labels.begin(), live_labels.end(), rejected) != live_labels.end()) {
            throw ContractError("select_label: memory and live_labels overlap on '" + rejected +
                                "'");
        }
    }
    std::string label = select_label_raw(overlay, target, live_labels, memory);
    if (std::find(live_labels.begin(), live_labels.end(), label) == live_labels.end()) {
        throw ProtocolViolationError("select_label: backend returned '" + label +
                                     "' which is not among the offered labels");
    }
    return label;
}

MllmVerdict MllmBackend::evaluate(const cv::Mat& single_box_render, FieldKind target) {
    MllmVerdict verdict = evaluate_raw(single_box_render, target);
    if (!verdict.passed() && verdict.explanation.empty()) {
        throw MalformedResponseError("evaluate: Fail verdict must carry an explanation");
    }
    return verdict;
}

std::map<std::string, std::string> MllmBackend::ocr_stack(
    const cv::Mat& page, const std::vector<std::string>& labels) {
    if (labels.empty() || labels.size() > 7) {
        throw ContractError("ocr_stack: label count must lie in [1,7]");
    }

    std::map<std::string, std::string> merged;
    auto absorb = [&](const std::map<std::string, std::string>& reply,
                      const std::vector<std::string>& requested) {
        for (const std::string& label : requested) {
            auto it = reply.find(label);
            if (it != reply.end()) merged[label] = it->second;
        }
    };

    absorb(ocr_stack_raw(page, labels), labels);

    std::vector<std::string> missing;
    for (const std::string& label : labels) {
        if (!merged.count(label)) missing.push_back(label);
    }
    if (!missing.empty()) {
        absorb(ocr_stack_raw(page, missing), missing);
        std::vector<std::string> still_missing;
        for (const std::string& label : labels) {
            if (!merged.count(label)) still_missing.push_back(label);
        }
        if (!still_missing.empty()) {
            std::string joined;
            for (const std::string& label : still_missing) {
                if (!joined.empty()) joined += ", ";
                joined += label;
            }
            throw OcrIncompleteError("ocr_stack: no text for labels after re-prompt: " + joined);
        }
    }
    return merged;
}

std::map<FieldKind, std::optional<std::string>> MllmBackend::ner(
    const CheckImage& image, const std::vector<FieldKind>& fields) {
    for (FieldKind field : fields) {
        if (field == FieldKind::signature) {
            throw ContractError("ner: signature is not an extractable text field");
        }
    }
    std::map<FieldKind, std::optional<std::string>> reply = ner_raw(image, fields);
    for (FieldKind field : fields) {
        if (!reply.count(field)) {
            throw MalformedResponseError(
                "ner: response is missing field '" + std::string(field_kind_name(field)) + "'");
        }
    }
    return reply;
}

}  // namespace checkfield
