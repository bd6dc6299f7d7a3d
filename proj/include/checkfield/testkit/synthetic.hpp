#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "checkfield/backend.hpp"
#include "checkfield/config.hpp"
#include "checkfield/module2.hpp"
#include "checkfield/replay.hpp"

namespace checkfield::testkit {

// Hand-placed description of a synthetic check plus exactly how the scripted
// backends behave on it. The builder paints the check, wires semantic
// backends from this description, runs the real pipeline once under
// recording, and hands back the replay script plus the expected result.
struct ScenarioSpec {
    struct Field {
        FieldKind kind;
        double x1, y1, x2, y2;  // ground-truth box, original_space
        std::string text;
        bool draw = true;
    };

    struct Candidate {
        PromptGroup group;
        double x1, y1, x2, y2;  // proposal box, original_space
        double score;
        std::string ocr_text;                  // what OCR reads in the crop
        std::optional<FieldKind> truth_field;  // what the box actually covers
    };

    std::string name;
    int width = 1200;
    int height = 560;
    std::vector<Field> fields;
    std::vector<Candidate> candidates;
    std::map<FieldKind, std::optional<std::string>> ner;  // all 8 text fields
    // Candidate indices the signature actor prefers (and the evaluator
    // rejects) before it picks the true signature box.
    std::vector<std::size_t> signature_wrong_picks;
    // Candidate index whose OCR text is omitted on multi-label requests,
    // forcing the one re-prompt.
    std::optional<std::size_t> ocr_dropout_candidate;
};

// Deterministic renderer for the synthetic checks.
CheckImage paint_check(const ScenarioSpec& spec);

// VLM answering from the scenario's candidate list.
class ScriptedVlm final : public VlmBackend {
public:
    ScriptedVlm(const ScenarioSpec& spec, const CheckImage& image);

    std::vector<ScoredBox> propose_raw(const VlmRequest& request) override;

private:
    const ScenarioSpec& spec_;
    PadTransform transform_;
    std::string model_hash_;
};

// MLLM that grades and reads based on what each candidate box actually
// covers. Stateless, so record and replay see identical behavior.
class ScriptedMllm final : public MllmBackend {
public:
    ScriptedMllm(const ScenarioSpec& spec, const CheckImage& image,
                 const std::map<PromptGroup, CandidateSet>& sets, const EngineConfig& config);

    std::string select_label_raw(const cv::Mat& overlay, FieldKind target,
                                 const std::vector<std::string>& live_labels,
                                 const std::vector<std::string>& memory) override;
    MllmVerdict evaluate_raw(const cv::Mat& single_box_render, FieldKind target) override;
    std::map<std::string, std::string> ocr_stack_raw(
        const cv::Mat& page, const std::vector<std::string>& labels) override;
    std::map<FieldKind, std::optional<std::string>> ner_raw(
        const CheckImage& image, const std::vector<FieldKind>& fields) override;

private:
    struct CandidateInfo {
        PromptGroup group;
        std::string label;
        std::optional<FieldKind> truth_field;
        std::string ocr_text;
    };

    const ScenarioSpec& spec_;
    std::string check_hash_;
    std::map<std::string, CandidateInfo> by_render_hash_;           // single-box renders
    std::map<PromptGroup, std::map<std::string, std::string>> texts_by_label_;
    std::map<std::string, PromptGroup> page_group_by_hash_;         // stack pages
    std::vector<std::string> signature_preference_;                 // labels, in pick order
    std::optional<std::pair<PromptGroup, std::string>> dropout_;
};

struct BuiltScenario {
    ScenarioSpec spec;
    CheckImage image;
    ReplayScript script;
    DetectionResult expected;
    std::optional<LoopOutcome> signature_loop;
};

// Paints the check, records the pipeline against the scripted backends, and
// returns everything a replay-based test needs.
BuiltScenario build_scenario(const ScenarioSpec& spec, const EngineConfig& config);

// The stock scenarios: "clean" (every field found in one step), "ambiguous"
// (retries, CER ties, OCR re-prompt, multi-page stacks), "sparse" (no memo),
// and "partial" (a prompt group with no proposals plus a field whose
// candidates all miss the CER bar).
std::vector<ScenarioSpec> standard_scenarios();

// Writes checks/, replay/, truth/ (annotations + transcriptions), and
// expected/ under out_dir for every standard scenario.
void write_fixture_set(const std::filesystem::path& out_dir, const EngineConfig& config);

// Ground-truth corpus JSON (native layout) for a set of scenarios.
nlohmann::json ground_truth_json(const std::vector<ScenarioSpec>& specs);

// MLLM backend built from plain lambdas, for unit tests that need precise
// turn-by-turn control without painting images.
class LambdaMllm final : public MllmBackend {
public:
    std::function<std::string(const cv::Mat&, FieldKind, const std::vector<std::string>&,
                              const std::vector<std::string>&)>
        on_select;
    std::function<MllmVerdict(const cv::Mat&, FieldKind)> on_evaluate;
    std::function<std::map<std::string, std::string>(const cv::Mat&,
                                                     const std::vector<std::string>&)>
        on_ocr;
    std::function<std::map<FieldKind, std::optional<std::string>>(
        const CheckImage&, const std::vector<FieldKind>&)>
        on_ner;

    std::string select_label_raw(const cv::Mat& overlay, FieldKind target,
                                 const std::vector<std::string>& live_labels,
                                 const std::vector<std::string>& memory) override {
        return on_select(overlay, target, live_labels, memory);
    }
    MllmVerdict evaluate_raw(const cv::Mat& render, FieldKind target) override {
        return on_evaluate(render, target);
    }
    std::map<std::string, std::string> ocr_stack_raw(
        const cv::Mat& page, const std::vector<std::string>& labels) override {
        return on_ocr(page, labels);
    }
    std::map<FieldKind, std::optional<std::string>> ner_raw(
        const CheckImage& image, const std::vector<FieldKind>& fields) override {
        return on_ner(image, fields);
    }
};

}  // namespace checkfield::testkit
