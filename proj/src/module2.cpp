#include "checkfield/module2.hpp"

#include <algorithm>

#include "checkfield/errors.hpp"
#include "checkfield/render.hpp"

namespace checkfield {

std::vector<std::string> StackTexts::labels() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& [label, text] : entries) out.push_back(label);
    return out;
}

const std::string& StackTexts::text_of(const std::string& label) const {
    for (const auto& [entry_label, text] : entries) {
        if (entry_label == label) return text;
    }
    throw ContractError("StackTexts: no text for label '" + label + "'");
}

CerMatrix build_cer_matrix(const ReferenceSet& refs, const StackTexts& texts) {
    CerMatrix matrix;
    for (const auto& [field, reference] : refs.entries) {
        if (!reference.has_value() || reference->empty()) continue;  // no reference, no row
        CerMatrix::Row row;
        row.reserve(texts.entries.size());
        for (const auto& [label, text] : texts.entries) {
            row.emplace_back(label, cer(*reference, text));
        }
        matrix.rows.emplace(field, std::move(row));
    }
    return matrix;
}

std::vector<Survivor> filter_candidates(const CerMatrix::Row& row, double cer_threshold) {
    if (!(cer_threshold > 0.0) || cer_threshold > 1.0) {
        throw ContractError("filter_candidates: cer_threshold must lie in (0,1]");
    }
    std::vector<Survivor> survivors;
    for (const auto& [label, score] : row) {
        if (score.value < cer_threshold) {  // strictly below
            survivors.push_back(Survivor{label, score});
        }
    }
    std::stable_sort(survivors.begin(), survivors.end(),
                     [](const Survivor& a, const Survivor& b) { return a.cer.value < b.cer.value; });
    return survivors;
}

std::optional<FieldDetection> select_detection(const CheckImage& image, FieldKind field,
                                               const std::vector<Survivor>& survivors,
                                               const CandidateSet& candidates, MllmBackend& mllm,
                                               int t_max) {
    if (survivors.empty()) return std::nullopt;

    auto make_detection = [&](const Survivor& survivor, int iterations) {
        FieldDetection::Provenance provenance;
        provenance.module = 2;
        provenance.iterations = iterations;
        provenance.selected_label = survivor.label;
        provenance.cer = survivor.cer;
        return FieldDetection(field, candidates.at(survivor.label).scored.box,
                              std::move(provenance));
    };

    if (survivors.size() == 1) {
        return make_detection(survivors.front(), 0);
    }

    // Ascending-CER walk; a pass at CER c can only be beaten (by area) by a
    // later survivor with the same CER, so stop once CER grows past the best.
    std::optional<Survivor> best;
    double best_area = 0.0;
    int evaluations = 0;
    for (const Survivor& survivor : survivors) {
        if (best.has_value() && survivor.cer.value > best->cer.value) break;
        if (evaluations >= t_max) break;

        const CandidateSet::Entry& entry = candidates.at(survivor.label);
        const cv::Mat render = render_single_box(image, entry.scored.box, entry.label);
        const MllmVerdict verdict = mllm.evaluate(render, field);
        ++evaluations;
        if (!verdict.passed()) continue;

        const double area = entry.scored.box.area();
        if (!best.has_value() || area < best_area) {
            best = survivor;
            best_area = area;
        }
    }

    if (!best.has_value()) return std::nullopt;
    return make_detection(*best, evaluations);
}

CandidateSet vlm_candidates(const CheckImage& image, const cv::Mat& model,
                            const PadTransform& transform, const std::string& prompt,
                            VlmBackend& vlm, const EngineConfig& config) {
    VlmRequest request;
    request.image = model;
    request.prompt = prompt;
    request.score_threshold = config.score_threshold;
    request.max_detections = config.max_detections;

    const std::vector<ScoredBox> proposals = vlm.propose(request);
    const std::vector<ScoredBox> kept =
        size_filter(nms(proposals, config.nms_iou), model.cols, model.rows);

    std::vector<ScoredBox> in_original;
    in_original.reserve(kept.size());
    for (const ScoredBox& scored : kept) {
        try {
            in_original.push_back(ScoredBox(
                to_original(scored.box, transform, image.width(), image.height()), scored.score));
        } catch (const OutOfContentError&) {
            // proposals living in the padding carry no check content
        }
    }
    return CandidateSet::make(prompt, std::move(in_original), image.width(), image.height());
}

StackTexts ocr_candidates(const CheckImage& image, const CandidateSet& set, MllmBackend& mllm,
                          const EngineConfig& config) {
    StackTexts texts;
    for (const StackPage& page : compose_stack(image, set, config.stack_page_size)) {
        std::vector<std::string> labels;
        labels.reserve(page.entries.size());
        for (const StackPage::Entry& entry : page.entries) labels.push_back(entry.label);

        const std::map<std::string, std::string> reply = mllm.ocr_stack(page.image, labels);
        for (const std::string& label : labels) {
            texts.entries.emplace_back(label, normalize(reply.at(label), config.lowercase_cer));
        }
    }
    return texts;
}

namespace {

struct GroupState {
    bool ok = false;
    std::string error;
    CandidateSet set = CandidateSet::make("", {}, 1, 1);
};

// Transport-level outages abort the whole check; everything else is isolated.
bool is_outage(const BackendError& e) {
    return e.retryable();
}

}  // namespace

PipelineOutput detect_fields(const CheckImage& image, VlmBackend& vlm, MllmBackend& mllm,
                             const EngineConfig& config) {
    config.validate();

    PipelineOutput output;
    DetectionResult& result = output.result;
    result.source_id = image.source_id;
    result.width = image.width();
    result.height = image.height();

    const auto [model, transform] = resize_pad(image);

    // One VLM pass per prompt group.
    std::map<PromptGroup, GroupState> groups;
    for (PromptGroup group :
         {PromptGroup::signature, PromptGroup::check_fields, PromptGroup::texts}) {
        GroupState& state = groups[group];
        try {
            state.set = vlm_candidates(image, model, transform,
                                       std::string(prompt_group_text(group)), vlm, config);
            state.ok = true;
        } catch (const BackendError& e) {
            if (is_outage(e)) throw;
            state.error = e.what();
        }
    }

    // Module 1: signature.
    {
        FieldResult& field_result = result.fields[FieldKind::signature];
        const GroupState& state = groups[PromptGroup::signature];
        if (!state.ok) {
            field_result.status = FieldStatus::error;
            field_result.note = state.error;
        } else {
            try {
                LoopOutcome outcome =
                    detect_signature(image, state.set, config.t_max, mllm);
                if (outcome.found()) {
                    field_result.status = FieldStatus::detected;
                    field_result.detection = outcome.detection;
                } else {
                    field_result.status = FieldStatus::undetected;
                    field_result.note = outcome.diagnostic;
                }
                output.signature_loop = std::move(outcome);
            } catch (const BackendError& e) {
                if (is_outage(e)) throw;
                field_result.status = FieldStatus::error;
                field_result.note = e.what();
            }
        }
    }

    // Shared NER pass for the eight text fields.
    ReferenceSet refs;
    bool ner_ok = false;
    std::string ner_error;
    const std::vector<FieldKind> text_fields(module2_field_kinds().begin(),
                                             module2_field_kinds().end());
    try {
        for (auto& [field, text] : mllm.ner(image, text_fields)) {
            if (text.has_value()) {
                const std::string normalized = normalize(*text, config.lowercase_cer);
                refs.entries[field] =
                    normalized.empty() ? std::optional<std::string>{} : std::optional{normalized};
            } else {
                refs.entries[field] = std::nullopt;
            }
        }
        ner_ok = true;
    } catch (const BackendError& e) {
        if (is_outage(e)) throw;
        ner_error = e.what();
    }
    result.ner = refs.entries;

    // Module 2 per prompt group: shared OCR pass, then per-field matching.
    for (PromptGroup group : {PromptGroup::check_fields, PromptGroup::texts}) {
        std::vector<FieldKind> group_fields;
        for (FieldKind field : module2_field_kinds()) {
            if (prompt_group_of(field) == group) group_fields.push_back(field);
        }

        auto mark_all = [&](FieldStatus status, const std::string& note) {
            for (FieldKind field : group_fields) {
                FieldResult& field_result = result.fields[field];
                field_result.status = status;
                field_result.note = note;
            }
        };

        const GroupState& state = groups[group];
        if (!state.ok) {
            mark_all(FieldStatus::error, state.error);
            continue;
        }
        if (!ner_ok) {
            mark_all(FieldStatus::error, ner_error);
            continue;
        }
        if (state.set.empty()) {
            mark_all(FieldStatus::undetected, "no candidates from the detector");
            continue;
        }

        StackTexts texts;
        try {
            texts = ocr_candidates(image, state.set, mllm, config);
        } catch (const BackendError& e) {
            if (is_outage(e)) throw;
            mark_all(FieldStatus::error, e.what());
            continue;
        }

        ReferenceSet group_refs;
        for (FieldKind field : group_fields) {
            auto it = refs.entries.find(field);
            if (it != refs.entries.end()) group_refs.entries[field] = it->second;
        }
        const CerMatrix matrix = build_cer_matrix(group_refs, texts);

        for (FieldKind field : group_fields) {
            FieldResult& field_result = result.fields[field];
            auto row = matrix.rows.find(field);
            if (row == matrix.rows.end()) {
                field_result.status = FieldStatus::undetected;
                field_result.note = "no reference text from NER";
                continue;
            }
            try {
                const std::vector<Survivor> survivors =
                    filter_candidates(row->second, config.cer_threshold);
                std::optional<FieldDetection> detection =
                    select_detection(image, field, survivors, state.set, mllm, config.t_max);
                if (!detection.has_value()) {
                    field_result.status = FieldStatus::undetected;
                    field_result.note = survivors.empty()
                                            ? "no candidate below the CER threshold"
                                            : "no candidate passed the location check";
                    continue;
                }
                if (field == FieldKind::micr) {
                    detection = FieldDetection(
                        field,
                        micr_widen(detection->box, image.width())
                            .clamped(image.width(), image.height()),
                        detection->provenance);
                }
                field_result.status = FieldStatus::detected;
                field_result.detection = std::move(detection);
            } catch (const BackendError& e) {
                if (is_outage(e)) throw;
                field_result.status = FieldStatus::error;
                field_result.note = e.what();
            }
        }
    }

    return output;
}

}  // namespace checkfield
