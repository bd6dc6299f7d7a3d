#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "checkfield/backend.hpp"

namespace checkfield {

// Request fingerprints: request kind + prompt/target + content hash of the
// raster the request carries. Serialization is fixed so fingerprints are
// stable across platforms and runs.
std::string fingerprint_vlm(const std::string& prompt, const cv::Mat& image);
std::string fingerprint_select(FieldKind target, const cv::Mat& overlay);
std::string fingerprint_evaluate(FieldKind target, const cv::Mat& render);
std::string fingerprint_ocr(const std::vector<std::string>& labels, const cv::Mat& page);
std::string fingerprint_ner(const std::vector<FieldKind>& fields, const cv::Mat& image);

// One scenario's canned responses, keyed by request fingerprint. Box
// coordinates inside `response` payloads are model-space pixels.
class ReplayScript {
public:
    struct Entry {
        std::string kind;  // vlm | select | evaluate | ocr | ner
        std::string note;  // human-readable annotation
        nlohmann::json response;
    };

    ReplayScript() = default;
    explicit ReplayScript(std::string scenario) : scenario_(std::move(scenario)) {}

    static ReplayScript load(const std::filesystem::path& path);
    // Loads one script file, or merges every *.json under a directory.
    static ReplayScript load_any(const std::filesystem::path& path);

    void save(const std::filesystem::path& path) const;
    nlohmann::json to_json() const;

    // Duplicate fingerprints are an error; a script never answers ambiguously.
    void add(const std::string& fingerprint, Entry entry);
    void merge(const ReplayScript& other);

    const std::string& scenario() const { return scenario_; }
    std::size_t size() const { return responses_.size(); }

    // MissingFixtureError when no response is scripted; `context` goes into
    // the message so the missing request is identifiable.
    const Entry& lookup(const std::string& fingerprint, const std::string& context) const;

private:
    std::string scenario_;
    std::unordered_map<std::string, Entry> responses_;
    std::vector<std::string> order_;  // insertion order, for readable saves
};

// Deterministic stand-ins for the live services: every request is answered
// from the script, unmatched requests fail loudly. Immutable after
// construction, safe to share across threads.
class ReplayVlm final : public VlmBackend {
public:
    explicit ReplayVlm(std::shared_ptr<const ReplayScript> script) : script_(std::move(script)) {}

    std::vector<ScoredBox> propose_raw(const VlmRequest& request) override;

private:
    std::shared_ptr<const ReplayScript> script_;
};

class ReplayMllm final : public MllmBackend {
public:
    explicit ReplayMllm(std::shared_ptr<const ReplayScript> script) : script_(std::move(script)) {}

    std::string select_label_raw(const cv::Mat& overlay, FieldKind target,
                                 const std::vector<std::string>& live_labels,
                                 const std::vector<std::string>& memory) override;
    MllmVerdict evaluate_raw(const cv::Mat& single_box_render, FieldKind target) override;
    std::map<std::string, std::string> ocr_stack_raw(
        const cv::Mat& page, const std::vector<std::string>& labels) override;
    std::map<FieldKind, std::optional<std::string>> ner_raw(
        const CheckImage& image, const std::vector<FieldKind>& fields) override;

private:
    std::shared_ptr<const ReplayScript> script_;
};

// Wrappers that pass requests through to an inner backend and write each
// (fingerprint, response) pair into a script, so a scripted scenario can be
// captured once and replayed forever.
class RecordingVlm final : public VlmBackend {
public:
    RecordingVlm(VlmBackend& inner, ReplayScript& script) : inner_(inner), script_(script) {}

    std::vector<ScoredBox> propose_raw(const VlmRequest& request) override;

private:
    VlmBackend& inner_;
    ReplayScript& script_;
};

class RecordingMllm final : public MllmBackend {
public:
    RecordingMllm(MllmBackend& inner, ReplayScript& script) : inner_(inner), script_(script) {}

    std::string select_label_raw(const cv::Mat& overlay, FieldKind target,
                                 const std::vector<std::string>& live_labels,
                                 const std::vector<std::string>& memory) override;
    MllmVerdict evaluate_raw(const cv::Mat& single_box_render, FieldKind target) override;
    std::map<std::string, std::string> ocr_stack_raw(
        const cv::Mat& page, const std::vector<std::string>& labels) override;
    std::map<FieldKind, std::optional<std::string>> ner_raw(
        const CheckImage& image, const std::vector<FieldKind>& fields) override;

private:
    MllmBackend& inner_;
    ReplayScript& script_;
};

}  // namespace checkfield
