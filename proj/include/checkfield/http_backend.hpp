#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "checkfield/backend.hpp"
#include "checkfield/config.hpp"

namespace checkfield {

// JSON-over-HTTP client shared by the VLM and MLLM backends: one POST
// endpoint per operation, PNG images base64-encoded in the request body,
// bounded retries with a fixed per-attempt timeout, and a cap on concurrent
// in-flight requests. Retries resend the identical body.
class HttpChannel {
public:
    HttpChannel(BackendEndpoint endpoint, int max_in_flight);
    ~HttpChannel();

    nlohmann::json post(const std::string& path, const nlohmann::json& body);

    static std::string encode_image(const cv::Mat& image);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class HttpVlm final : public VlmBackend {
public:
    HttpVlm(const EngineConfig& config);

    std::vector<ScoredBox> propose_raw(const VlmRequest& request) override;

private:
    HttpChannel channel_;
};

class HttpMllm final : public MllmBackend {
public:
    HttpMllm(const EngineConfig& config);

    std::string select_label_raw(const cv::Mat& overlay, FieldKind target,
                                 const std::vector<std::string>& live_labels,
                                 const std::vector<std::string>& memory) override;
    MllmVerdict evaluate_raw(const cv::Mat& single_box_render, FieldKind target) override;
    std::map<std::string, std::string> ocr_stack_raw(
        const cv::Mat& page, const std::vector<std::string>& labels) override;
    std::map<FieldKind, std::optional<std::string>> ner_raw(
        const CheckImage& image, const std::vector<FieldKind>& fields) override;

private:
    HttpChannel channel_;
    PromptTemplates prompts_;
};

// Expands {placeholder} markers in a prompt template.
std::string fill_template(std::string text,
                          const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace checkfield
