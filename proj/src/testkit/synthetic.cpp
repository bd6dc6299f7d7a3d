#include "checkfield/testkit/synthetic.hpp"

#include <fstream>
#include <stdexcept>

#include <opencv2/imgproc.hpp>

#include "checkfield/errors.hpp"
#include "checkfield/render.hpp"

namespace checkfield::testkit {

using nlohmann::json;

namespace {

PromptGroup group_of_prompt(const std::string& prompt) {
    for (PromptGroup group :
         {PromptGroup::signature, PromptGroup::check_fields, PromptGroup::texts}) {
        if (prompt == prompt_group_text(group)) return group;
    }
    throw std::logic_error("scenario: unexpected detector prompt '" + prompt + "'");
}

BoundingBox spec_box(double x1, double y1, double x2, double y2) {
    return BoundingBox(x1, y1, x2, y2, CoordSpace::original_space);
}

}  // namespace

CheckImage paint_check(const ScenarioSpec& spec) {
    cv::Mat canvas(spec.height, spec.width, CV_8UC3, cv::Scalar(252, 252, 252));
    cv::rectangle(canvas, cv::Rect(4, 4, spec.width - 8, spec.height - 8), cv::Scalar(90, 90, 90),
                  2);

    for (const ScenarioSpec::Field& field : spec.fields) {
        if (!field.draw || field.text.empty()) continue;
        const int font = field.kind == FieldKind::signature ? cv::FONT_HERSHEY_SCRIPT_SIMPLEX
                                                            : cv::FONT_HERSHEY_SIMPLEX;
        const double box_w = field.x2 - field.x1;
        const double box_h = field.y2 - field.y1;
        int baseline = 0;
        const cv::Size at_unit = cv::getTextSize(field.text, font, 1.0, 1, &baseline);
        double scale = 0.75 * box_h / std::max(1, at_unit.height);
        if (at_unit.width * scale > box_w - 8) {
            scale = (box_w - 8) / at_unit.width;
        }
        cv::putText(canvas, field.text,
                    cv::Point(static_cast<int>(field.x1) + 4, static_cast<int>(field.y2) - 6),
                    font, scale, cv::Scalar(25, 25, 25), 1, cv::LINE_8);
    }
    return CheckImage::from_mat(canvas, spec.name);
}

ScriptedVlm::ScriptedVlm(const ScenarioSpec& spec, const CheckImage& image) : spec_(spec) {
    auto [model, transform] = resize_pad(image);
    transform_ = transform;
    model_hash_ = image_content_hash(model);
}

std::vector<ScoredBox> ScriptedVlm::propose_raw(const VlmRequest& request) {
    if (image_content_hash(request.image) != model_hash_) {
        throw std::logic_error("scenario: detector got an unexpected raster");
    }
    const PromptGroup group = group_of_prompt(request.prompt);
    std::vector<ScoredBox> boxes;
    for (const ScenarioSpec::Candidate& candidate : spec_.candidates) {
        if (candidate.group != group) continue;
        boxes.push_back(ScoredBox(
            transform_.to_model(spec_box(candidate.x1, candidate.y1, candidate.x2, candidate.y2)),
            candidate.score));
    }
    return boxes;
}

ScriptedMllm::ScriptedMllm(const ScenarioSpec& spec, const CheckImage& image,
                           const std::map<PromptGroup, CandidateSet>& sets,
                           const EngineConfig& config)
    : spec_(spec), check_hash_(image_content_hash(image.pixels)) {
    // Resolve every candidate-set entry back to the scenario candidate whose
    // box it came from.
    std::map<PromptGroup, std::vector<const ScenarioSpec::Candidate*>> entry_sources;
    for (const auto& [group, set] : sets) {
        for (const CandidateSet::Entry& entry : set.entries()) {
            const ScenarioSpec::Candidate* source = nullptr;
            double best = 0.98;  // boxes only pass through exact transforms
            for (const ScenarioSpec::Candidate& candidate : spec.candidates) {
                if (candidate.group != group) continue;
                const double overlap = iou(
                    entry.scored.box,
                    spec_box(candidate.x1, candidate.y1, candidate.x2, candidate.y2));
                if (overlap > best) {
                    best = overlap;
                    source = &candidate;
                }
            }
            if (!source) {
                throw std::logic_error("scenario '" + spec.name +
                                       "': candidate entry matches no scripted box");
            }
            entry_sources[group].push_back(source);

            by_render_hash_[image_content_hash(
                render_single_box(image, entry.scored.box, entry.label))] =
                CandidateInfo{group, entry.label, source->truth_field, source->ocr_text};
            texts_by_label_[group][entry.label] = source->ocr_text;
        }
    }

    // Pages the pipeline will OCR, so label sets can be routed to the right
    // prompt group.
    for (PromptGroup group : {PromptGroup::check_fields, PromptGroup::texts}) {
        auto it = sets.find(group);
        if (it == sets.end() || it->second.empty()) continue;
        for (const StackPage& page : compose_stack(image, it->second, config.stack_page_size)) {
            page_group_by_hash_[image_content_hash(page.image)] = group;
        }
    }

    // Actor preferences: the scripted wrong picks first, the true signature
    // box last.
    auto signature_set = sets.find(PromptGroup::signature);
    if (signature_set != sets.end()) {
        const auto& sources = entry_sources[PromptGroup::signature];
        const auto& entries = signature_set->second.entries();
        for (std::size_t pick : spec.signature_wrong_picks) {
            for (std::size_t i = 0; i < entries.size(); ++i) {
                if (sources[i] == &spec.candidates.at(pick)) {
                    signature_preference_.push_back(entries[i].label);
                }
            }
        }
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (sources[i]->truth_field == FieldKind::signature) {
                signature_preference_.push_back(entries[i].label);
                break;
            }
        }
    }

    if (spec.ocr_dropout_candidate.has_value()) {
        const ScenarioSpec::Candidate& target = spec.candidates.at(*spec.ocr_dropout_candidate);
        auto set_it = sets.find(target.group);
        if (set_it != sets.end()) {
            const auto& sources = entry_sources[target.group];
            const auto& entries = set_it->second.entries();
            for (std::size_t i = 0; i < entries.size(); ++i) {
                if (sources[i] == &target) {
                    dropout_ = {target.group, entries[i].label};
                }
            }
        }
    }
}

std::string ScriptedMllm::select_label_raw(const cv::Mat& /*overlay*/, FieldKind target,
                                           const std::vector<std::string>& live_labels,
                                           const std::vector<std::string>& /*memory*/) {
    if (target != FieldKind::signature) {
        throw std::logic_error("scenario: unexpected select target");
    }
    for (const std::string& label : signature_preference_) {
        if (std::find(live_labels.begin(), live_labels.end(), label) != live_labels.end()) {
            return label;
        }
    }
    return live_labels.front();
}

MllmVerdict ScriptedMllm::evaluate_raw(const cv::Mat& single_box_render, FieldKind target) {
    auto it = by_render_hash_.find(image_content_hash(single_box_render));
    if (it == by_render_hash_.end()) {
        throw std::logic_error("scenario '" + spec_.name + "': unrecognized evaluation render");
    }
    const CandidateInfo& info = it->second;
    MllmVerdict verdict;
    if (info.truth_field.has_value() && *info.truth_field == target) {
        verdict.grade = MllmVerdict::Grade::pass;
        verdict.explanation = "the box covers the " + std::string(field_kind_name(target));
    } else {
        verdict.grade = MllmVerdict::Grade::fail;
        const std::string actual = info.truth_field.has_value()
                                       ? std::string(field_kind_name(*info.truth_field))
                                       : std::string("an unrelated marking");
        verdict.explanation =
            "the box covers " + actual + ", not the " + std::string(field_kind_name(target));
    }
    return verdict;
}

std::map<std::string, std::string> ScriptedMllm::ocr_stack_raw(
    const cv::Mat& page, const std::vector<std::string>& labels) {
    auto group_it = page_group_by_hash_.find(image_content_hash(page));
    PromptGroup group;
    if (group_it != page_group_by_hash_.end()) {
        group = group_it->second;
    } else if (labels.size() == 1) {
        // Re-prompt pages are rendered identically, so a single-label page we
        // have not seen can only be the re-prompt; find the label's group.
        group = PromptGroup::check_fields;
        for (const auto& [candidate_group, texts] : texts_by_label_) {
            if (texts.count(labels.front())) group = candidate_group;
        }
    } else {
        throw std::logic_error("scenario '" + spec_.name + "': unrecognized stack page");
    }

    std::map<std::string, std::string> reply;
    for (const std::string& label : labels) {
        if (dropout_.has_value() && dropout_->first == group && dropout_->second == label &&
            labels.size() > 1) {
            continue;  // omitted once; the re-prompt asks for it alone
        }
        auto text_it = texts_by_label_.at(group).find(label);
        if (text_it == texts_by_label_.at(group).end()) {
            throw std::logic_error("scenario '" + spec_.name + "': OCR asked for unknown label '" +
                                   label + "'");
        }
        reply[label] = text_it->second;
    }
    return reply;
}

std::map<FieldKind, std::optional<std::string>> ScriptedMllm::ner_raw(
    const CheckImage& image, const std::vector<FieldKind>& fields) {
    if (image_content_hash(image.pixels) != check_hash_) {
        throw std::logic_error("scenario: NER got an unexpected raster");
    }
    std::map<FieldKind, std::optional<std::string>> reply;
    for (FieldKind field : fields) {
        auto it = spec_.ner.find(field);
        if (it == spec_.ner.end()) {
            throw std::logic_error("scenario '" + spec_.name + "' does not script NER for '" +
                                   std::string(field_kind_name(field)) + "'");
        }
        reply[field] = it->second;
    }
    return reply;
}

BuiltScenario build_scenario(const ScenarioSpec& spec, const EngineConfig& config) {
    BuiltScenario built;
    built.spec = spec;
    built.image = paint_check(built.spec);
    built.script = ReplayScript(built.spec.name);

    ScriptedVlm vlm(built.spec, built.image);
    auto [model, transform] = resize_pad(built.image);
    std::map<PromptGroup, CandidateSet> sets;
    for (PromptGroup group :
         {PromptGroup::signature, PromptGroup::check_fields, PromptGroup::texts}) {
        sets.emplace(group, vlm_candidates(built.image, model, transform,
                                           std::string(prompt_group_text(group)), vlm, config));
    }
    ScriptedMllm mllm(built.spec, built.image, sets, config);

    RecordingVlm recording_vlm(vlm, built.script);
    RecordingMllm recording_mllm(mllm, built.script);
    PipelineOutput output = detect_fields(built.image, recording_vlm, recording_mllm, config);
    built.expected = std::move(output.result);
    built.signature_loop = std::move(output.signature_loop);
    return built;
}

std::vector<ScenarioSpec> standard_scenarios() {
    std::vector<ScenarioSpec> scenarios;

    {
        // Every field present; one-step signature pass; junk proposals that
        // the NMS and size filters must remove.
        ScenarioSpec s;
        s.name = "check_clean";
        s.width = 1200;
        s.height = 560;
        s.fields = {
            {FieldKind::bank_name, 60, 35, 320, 75, "FIRST MERIDIAN BANK"},
            {FieldKind::payer_name, 60, 95, 320, 130, "JOHN DOE"},
            {FieldKind::date, 880, 90, 1060, 125, "05/12/2024"},
            {FieldKind::payee_name, 160, 170, 490, 205, "Acme Supplies Inc"},
            {FieldKind::courtesy_amount, 950, 160, 1130, 200, "$1,250.00"},
            {FieldKind::legal_amount, 100, 240, 430, 275, "One thousand two hundred fifty and 00/100"},
            {FieldKind::memo, 90, 420, 330, 455, "Invoice 8841"},
            {FieldKind::signature, 760, 400, 1080, 470, "John Doe"},
            {FieldKind::micr, 0, 492, 1200, 538, "A123456789A 123456C 1001"},
        };
        using PG = PromptGroup;
        s.candidates = {
            {PG::signature, 880, 90, 1060, 125, 0.80, "", FieldKind::date},
            {PG::signature, 100, 240, 430, 275, 0.55, "", FieldKind::legal_amount},
            {PG::signature, 760, 400, 1080, 470, 0.30, "", FieldKind::signature},
            {PG::check_fields, 880, 90, 1060, 125, 0.90, "05/12/2024", FieldKind::date},
            {PG::check_fields, 950, 160, 1130, 200, 0.85, "$1,250.00", FieldKind::courtesy_amount},
            {PG::check_fields, 100, 240, 430, 275, 0.80,
             "One thousand two hundred fifty and 00/100", FieldKind::legal_amount},
            {PG::check_fields, 430, 492, 770, 538, 0.75, "6789A 123456C 10", FieldKind::micr},
            {PG::check_fields, 90, 420, 330, 455, 0.70, "Invoice 8841", FieldKind::memo},
            // dropped by the size filter: covers most of the check
            {PG::check_fields, 50, 50, 1150, 500, 0.95, "", std::nullopt},
            // dropped by the size filter: under 12 model pixels
            {PG::check_fields, 10, 10, 24, 22, 0.60, "", std::nullopt},
            // suppressed by NMS against the higher-scoring date box
            {PG::check_fields, 884, 92, 1062, 127, 0.40, "05/12/2024", FieldKind::date},
            {PG::texts, 60, 95, 320, 130, 0.65, "JOHN DOE", FieldKind::payer_name},
            {PG::texts, 160, 170, 490, 205, 0.60, "Acme Supplies Inc", FieldKind::payee_name},
            {PG::texts, 60, 35, 320, 75, 0.75, "FIRST MERIDIAN BANK", FieldKind::bank_name},
        };
        s.ner = {
            {FieldKind::date, "05/12/2024"},
            {FieldKind::courtesy_amount, "$1,250.00"},
            {FieldKind::legal_amount, "One thousand two hundred fifty and 00/100"},
            {FieldKind::payer_name, "JOHN DOE"},
            {FieldKind::bank_name, "FIRST MERIDIAN BANK"},
            {FieldKind::memo, "Invoice 8841"},
            {FieldKind::micr, "A123456789A 123456C 1001"},
            {FieldKind::payee_name, "Acme Supplies Inc"},
        };
        scenarios.push_back(std::move(s));
    }

    {
        // Two failed signature picks before the pass; a payer-name/signature
        // CER tie resolved by the evaluator; a date CER tie resolved by box
        // area; an OCR reply missing one label; a nine-crop stack that needs
        // two pages.
        ScenarioSpec s;
        s.name = "check_ambiguous";
        s.width = 1280;
        s.height = 600;
        s.fields = {
            {FieldKind::bank_name, 700, 40, 1000, 78, "HARBOR TRUST"},
            {FieldKind::payer_name, 80, 50, 340, 88, "Maria Chen"},
            {FieldKind::date, 920, 110, 1110, 148, "06/30/2025"},
            {FieldKind::payee_name, 170, 190, 520, 228, "Atlas Freight Co"},
            {FieldKind::courtesy_amount, 1000, 180, 1180, 222, "$88.40"},
            {FieldKind::legal_amount, 110, 260, 470, 298, "Eighty eight and 40/100"},
            {FieldKind::memo, 100, 450, 360, 488, "JULY HAULAGE"},
            {FieldKind::signature, 800, 430, 1140, 505, "Maria Chen"},
            {FieldKind::micr, 0, 523, 1280, 570, "A887700221A 5544332C 0017"},
        };
        using PG = PromptGroup;
        s.candidates = {
            /*0*/ {PG::signature, 100, 450, 360, 488, 0.85, "", FieldKind::memo},
            /*1*/ {PG::signature, 170, 190, 520, 228, 0.70, "", FieldKind::payee_name},
            /*2*/ {PG::signature, 800, 430, 1140, 505, 0.40, "", FieldKind::signature},
            /*3*/ {PG::signature, 920, 110, 1110, 148, 0.55, "", FieldKind::date},
            /*4*/ {PG::check_fields, 920, 110, 1110, 148, 0.90, "06/30/2025", FieldKind::date},
            // same text, much looser box around the date: equal CER, bigger area
            /*5*/ {PG::check_fields, 860, 85, 1160, 185, 0.35, "06/30/2025", FieldKind::date},
            /*6*/ {PG::check_fields, 1000, 180, 1180, 222, 0.80, "$88.40",
                   FieldKind::courtesy_amount},
            /*7*/ {PG::check_fields, 110, 260, 470, 298, 0.75, "Eighty eight and 40/100",
                   FieldKind::legal_amount},
            /*8*/ {PG::check_fields, 460, 523, 810, 570, 0.72, "221A 5544332C 00", FieldKind::micr},
            /*9*/ {PG::check_fields, 100, 450, 360, 488, 0.65, "JULY HAULAGE", FieldKind::memo},
            /*10*/ {PG::texts, 80, 50, 340, 88, 0.88, "Maria Chen", FieldKind::payer_name},
            // the signature read as handwriting: same text as the payer name
            /*11*/ {PG::texts, 800, 430, 1140, 505, 0.78, "Maria Chen", FieldKind::signature},
            /*12*/ {PG::texts, 170, 190, 520, 228, 0.86, "Atlas Freight Co", FieldKind::payee_name},
            /*13*/ {PG::texts, 700, 40, 1000, 78, 0.84, "HARBOR TRUST", FieldKind::bank_name},
            /*14*/ {PG::texts, 560, 60, 720, 100, 0.50, "#####", std::nullopt},
            /*15*/ {PG::texts, 560, 130, 730, 170, 0.48, "@@@@@", std::nullopt},
            /*16*/ {PG::texts, 600, 250, 780, 292, 0.46, "%%%%%", std::nullopt},
            /*17*/ {PG::texts, 640, 330, 820, 372, 0.44, "&&&&&", std::nullopt},
            /*18*/ {PG::texts, 100, 330, 300, 372, 0.42, "*****", std::nullopt},
        };
        s.ner = {
            {FieldKind::date, "06/30/2025"},
            {FieldKind::courtesy_amount, "$88.40"},
            {FieldKind::legal_amount, "Eighty eight and 40/100"},
            {FieldKind::payer_name, "Maria Chen"},
            {FieldKind::bank_name, "HARBOR TRUST"},
            {FieldKind::memo, "JULY HAULAGE"},
            {FieldKind::micr, "A887700221A 5544332C 0017"},
            {FieldKind::payee_name, "Atlas Freight Co"},
        };
        s.signature_wrong_picks = {0, 1};
        s.ocr_dropout_candidate = 9;
        scenarios.push_back(std::move(s));
    }

    {
        // A check without a memo: NER reports it absent, the other eight
        // fields resolve normally.
        ScenarioSpec s;
        s.name = "check_sparse";
        s.width = 1100;
        s.height = 500;
        s.fields = {
            {FieldKind::bank_name, 60, 30, 330, 66, "CITADEL SAVINGS"},
            {FieldKind::payer_name, 60, 86, 300, 120, "R. IYER"},
            {FieldKind::date, 800, 80, 975, 114, "11/02/2023"},
            {FieldKind::payee_name, 140, 160, 450, 196, "Northwind LLC"},
            {FieldKind::courtesy_amount, 840, 150, 1020, 190, "$740.22"},
            {FieldKind::legal_amount, 90, 225, 410, 260, "Seven hundred forty and 22/100"},
            {FieldKind::signature, 650, 350, 960, 420, "R Iyer"},
            {FieldKind::micr, 0, 444, 1100, 481, "A314159265A 2718281C 0420"},
        };
        using PG = PromptGroup;
        s.candidates = {
            {PG::signature, 800, 80, 975, 114, 0.60, "", FieldKind::date},
            {PG::signature, 650, 350, 960, 420, 0.45, "", FieldKind::signature},
            {PG::check_fields, 800, 80, 975, 114, 0.90, "11/02/2023", FieldKind::date},
            {PG::check_fields, 840, 150, 1020, 190, 0.82, "$740.22", FieldKind::courtesy_amount},
            {PG::check_fields, 90, 225, 410, 260, 0.78, "Seven hundred forty and 22/100",
             FieldKind::legal_amount},
            {PG::check_fields, 380, 444, 700, 481, 0.70, "59265A 2718281C", FieldKind::micr},
            {PG::texts, 60, 86, 300, 120, 0.80, "R. IYER", FieldKind::payer_name},
            {PG::texts, 140, 160, 450, 196, 0.75, "Northwind LLC", FieldKind::payee_name},
            {PG::texts, 60, 30, 330, 66, 0.72, "CITADEL SAVINGS", FieldKind::bank_name},
        };
        s.ner = {
            {FieldKind::date, "11/02/2023"},
            {FieldKind::courtesy_amount, "$740.22"},
            {FieldKind::legal_amount, "Seven hundred forty and 22/100"},
            {FieldKind::payer_name, "R. IYER"},
            {FieldKind::bank_name, "CITADEL SAVINGS"},
            {FieldKind::memo, std::nullopt},
            {FieldKind::micr, "A314159265A 2718281C 0420"},
            {FieldKind::payee_name, "Northwind LLC"},
        };
        scenarios.push_back(std::move(s));
    }

    {
        // The detector finds nothing for the "texts" prompt and no usable box
        // for the legal amount; those fields stay undetected while the rest
        // resolve.
        ScenarioSpec s;
        s.name = "check_partial";
        s.width = 1150;
        s.height = 520;
        s.fields = {
            {FieldKind::bank_name, 640, 36, 940, 70, "PIONEER NATIONAL"},
            {FieldKind::payer_name, 70, 46, 330, 82, "T. OKAFOR"},
            {FieldKind::date, 850, 100, 1020, 134, "03/18/2024"},
            {FieldKind::payee_name, 150, 170, 470, 205, "Quarry Works"},
            {FieldKind::courtesy_amount, 880, 160, 1060, 200, "$2,075.90"},
            {FieldKind::legal_amount, 100, 235, 440, 270, "Two thousand seventy five and 90/100"},
            {FieldKind::memo, 80, 380, 320, 415, "Gravel order"},
            {FieldKind::signature, 620, 370, 930, 440, "T Okafor"},
            {FieldKind::micr, 0, 452, 1150, 495, "A990011223A 6655443C 0099"},
        };
        using PG = PromptGroup;
        s.candidates = {
            {PG::signature, 620, 370, 930, 440, 0.50, "", FieldKind::signature},
            {PG::signature, 850, 100, 1020, 134, 0.65, "", FieldKind::date},
            {PG::check_fields, 850, 100, 1020, 134, 0.88, "03/18/2024", FieldKind::date},
            {PG::check_fields, 880, 160, 1060, 200, 0.80, "$2,075.90",
             FieldKind::courtesy_amount},
            {PG::check_fields, 80, 380, 320, 415, 0.72, "Gravel order", FieldKind::memo},
            {PG::check_fields, 400, 452, 740, 495, 0.68, "1223A 6655443C 0", FieldKind::micr},
            // no candidates at all for the "texts" prompt
        };
        s.ner = {
            {FieldKind::date, "03/18/2024"},
            {FieldKind::courtesy_amount, "$2,075.90"},
            {FieldKind::legal_amount, "Two thousand seventy five and 90/100"},
            {FieldKind::payer_name, "T. OKAFOR"},
            {FieldKind::bank_name, "PIONEER NATIONAL"},
            {FieldKind::memo, "Gravel order"},
            {FieldKind::micr, "A990011223A 6655443C 0099"},
            {FieldKind::payee_name, "Quarry Works"},
        };
        scenarios.push_back(std::move(s));
    }

    return scenarios;
}

json ground_truth_json(const std::vector<ScenarioSpec>& specs) {
    json checks = json::array();
    for (const ScenarioSpec& spec : specs) {
        json fields = json::object();
        for (const ScenarioSpec::Field& field : spec.fields) {
            fields[std::string(field_kind_name(field.kind))] =
                json{{"box", {field.x1, field.y1, field.x2, field.y2}}, {"text", field.text}};
        }
        checks.push_back(json{{"source_id", spec.name},
                              {"width", spec.width},
                              {"height", spec.height},
                              {"fields", std::move(fields)}});
    }
    return json{{"checks", std::move(checks)}};
}

void write_fixture_set(const std::filesystem::path& out_dir, const EngineConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "checks");
    fs::create_directories(out_dir / "replay");
    fs::create_directories(out_dir / "expected");
    fs::create_directories(out_dir / "truth");

    const std::vector<ScenarioSpec> specs = standard_scenarios();
    for (const ScenarioSpec& spec : specs) {
        BuiltScenario built = build_scenario(spec, config);
        save_png(built.image.pixels, out_dir / "checks" / (spec.name + ".png"));
        built.script.save(out_dir / "replay" / (spec.name + ".json"));
        std::ofstream expected(out_dir / "expected" / (spec.name + ".json"));
        expected << built.expected.to_json().dump(2) << '\n';
    }

    {
        std::ofstream truth(out_dir / "truth" / "annotations.json");
        truth << ground_truth_json(specs).dump(2) << '\n';
    }
    {
        std::ofstream csv(out_dir / "truth" / "transcriptions.csv");
        csv << "source_id,field,text\n";
        auto quote = [](const std::string& text) {
            std::string quoted = "\"";
            for (char c : text) {
                if (c == '"') quoted += "\"\"";
                else quoted.push_back(c);
            }
            quoted += '"';
            return quoted;
        };
        for (const ScenarioSpec& spec : specs) {
            for (const ScenarioSpec::Field& field : spec.fields) {
                csv << spec.name << ',' << field_kind_name(field.kind) << ','
                    << quote(field.text) << '\n';
            }
        }
    }
}

}  // namespace checkfield::testkit
