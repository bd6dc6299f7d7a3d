#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace checkfield {

struct BackendEndpoint {
    std::string base_url;      // ${VAR} references are expanded at load time
    std::string api_key_env;   // name of the env var holding the credential
    int timeout_ms = 30000;    // per attempt
    int max_retries = 2;       // extra attempts after the first
};

// Prompt templates sent to the live backends. {field}, {labels}, {memory} and
// {fields} are substituted per request. Replay mode ignores them.
struct PromptTemplates {
    std::string select =
        "The bank check shows numbered candidate boxes. Reply with JSON "
        "{\"label\": ...} naming the box that contains the {field}. Do not pick any of "
        "these already rejected labels: {memory}.";
    std::string evaluate =
        "The image shows one highlighted box on a bank check. Reply with JSON "
        "{\"grade\": \"Pass\"|\"Fail\", \"explanation\": ...} saying whether the box "
        "covers the {field}.";
    std::string ocr =
        "Read each labeled row of this stacked image. Reply with JSON "
        "{\"texts\": {label: text}} covering exactly these labels: {labels}.";
    std::string ner =
        "Extract these fields from the check image: {fields}. Reply with JSON "
        "{\"fields\": {name: text}} using null for fields that are absent.";
};

struct EngineConfig {
    BackendEndpoint vlm;
    BackendEndpoint mllm;

    double score_threshold = 0.01;  // legal range [0.001, 0.03]
    double nms_iou = 0.4;
    int max_detections = 3600;
    double cer_threshold = 0.8;     // C_o; survivors need CER strictly below
    int t_max = 10;                 // iteration cap for the agentic loops
    int stack_page_size = 7;
    bool lowercase_cer = false;
    int max_in_flight = 4;          // cap on concurrent live requests

    PromptTemplates prompts;

    // Throws ConfigError when any knob is outside its documented range.
    void validate() const;

    nlohmann::json to_json() const;  // resolved config, credentials as env names only
    static EngineConfig from_json(const nlohmann::json& body);
    static EngineConfig load(const std::filesystem::path& path);
};

}  // namespace checkfield
