#include "checkfield/config.hpp"

#include <fstream>
#include <sstream>

#include "checkfield/errors.hpp"
#include "checkfield/util.hpp"

namespace checkfield {

using nlohmann::json;

namespace {

void require_range(double value, double lo, double hi, const char* name) {
    if (value < lo || value > hi) {
        std::ostringstream msg;
        msg << "config: " << name << " = " << value << " outside legal range [" << lo << ", " << hi
            << "]";
        throw ConfigError(msg.str());
    }
}

json endpoint_to_json(const BackendEndpoint& endpoint) {
    return json{{"base_url", endpoint.base_url},
                {"api_key_env", endpoint.api_key_env},
                {"timeout_ms", endpoint.timeout_ms},
                {"max_retries", endpoint.max_retries}};
}

BackendEndpoint endpoint_from_json(const json& body) {
    BackendEndpoint endpoint;
    endpoint.base_url = interpolate_env(body.value("base_url", endpoint.base_url));
    endpoint.api_key_env = body.value("api_key_env", endpoint.api_key_env);
    endpoint.timeout_ms = body.value("timeout_ms", endpoint.timeout_ms);
    endpoint.max_retries = body.value("max_retries", endpoint.max_retries);
    return endpoint;
}

}  // namespace

void EngineConfig::validate() const {
    require_range(score_threshold, 0.001, 0.03, "score_threshold");
    if (!(nms_iou > 0.0) || nms_iou > 1.0) {
        throw ConfigError("config: nms_iou must lie in (0,1]");
    }
    if (max_detections < 1) {
        throw ConfigError("config: max_detections must be >= 1");
    }
    if (!(cer_threshold > 0.0) || cer_threshold > 1.0) {
        throw ConfigError("config: cer_threshold must lie in (0,1]");
    }
    if (t_max < 1) {
        throw ConfigError("config: t_max must be >= 1");
    }
    if (stack_page_size < 1 || stack_page_size > 7) {
        throw ConfigError("config: stack_page_size must lie in [1,7]");
    }
    if (max_in_flight < 1) {
        throw ConfigError("config: max_in_flight must be >= 1");
    }
    for (const BackendEndpoint* endpoint : {&vlm, &mllm}) {
        if (endpoint->timeout_ms < 1) throw ConfigError("config: timeout_ms must be >= 1");
        if (endpoint->max_retries < 0) throw ConfigError("config: max_retries must be >= 0");
    }
}

json EngineConfig::to_json() const {
    return json{
        {"vlm", endpoint_to_json(vlm)},
        {"mllm", endpoint_to_json(mllm)},
        {"score_threshold", score_threshold},
        {"nms_iou", nms_iou},
        {"max_detections", max_detections},
        {"cer_threshold", cer_threshold},
        {"t_max", t_max},
        {"stack_page_size", stack_page_size},
        {"lowercase_cer", lowercase_cer},
        {"max_in_flight", max_in_flight},
        {"prompts",
         json{{"select", prompts.select},
              {"evaluate", prompts.evaluate},
              {"ocr", prompts.ocr},
              {"ner", prompts.ner}}},
    };
}

EngineConfig EngineConfig::from_json(const json& body) {
    if (!body.is_object()) {
        throw ConfigError("config: top level must be a JSON object");
    }
    EngineConfig config;
    if (body.contains("vlm")) config.vlm = endpoint_from_json(body["vlm"]);
    if (body.contains("mllm")) config.mllm = endpoint_from_json(body["mllm"]);
    config.score_threshold = body.value("score_threshold", config.score_threshold);
    config.nms_iou = body.value("nms_iou", config.nms_iou);
    config.max_detections = body.value("max_detections", config.max_detections);
    config.cer_threshold = body.value("cer_threshold", config.cer_threshold);
    config.t_max = body.value("t_max", config.t_max);
    config.stack_page_size = body.value("stack_page_size", config.stack_page_size);
    config.lowercase_cer = body.value("lowercase_cer", config.lowercase_cer);
    config.max_in_flight = body.value("max_in_flight", config.max_in_flight);
    if (body.contains("prompts")) {
        const json& prompts = body["prompts"];
        config.prompts.select = prompts.value("select", config.prompts.select);
        config.prompts.evaluate = prompts.value("evaluate", config.prompts.evaluate);
        config.prompts.ocr = prompts.value("ocr", config.prompts.ocr);
        config.prompts.ner = prompts.value("ner", config.prompts.ner);
    }
    config.validate();
    return config;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path.string() + "'");
    }
    json body;
    try {
        in >> body;
    } catch (const json::exception& e) {
        throw ConfigError("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(body);
}

}  // namespace checkfield
