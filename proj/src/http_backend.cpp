#include "checkfield/http_backend.hpp"

#include <condition_variable>
#include <cstdlib>
#include <mutex>

#include <httplib.h>
#include <opencv2/imgcodecs.hpp>

#include "checkfield/errors.hpp"
#include "checkfield/util.hpp"
#include "checkfield/wire.hpp"

namespace checkfield {

using nlohmann::json;

namespace {

// Counting gate for the in-flight cap (std::counting_semaphore needs a
// compile-time ceiling, which the config does not have).
class Gate {
public:
    explicit Gate(int slots) : slots_(slots) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return slots_ > 0; });
        --slots_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
};

struct GateHold {
    Gate& gate;
    explicit GateHold(Gate& g) : gate(g) { gate.acquire(); }
    ~GateHold() { gate.release(); }
};

}  // namespace

struct HttpChannel::Impl {
    BackendEndpoint endpoint;
    Gate gate;

    Impl(BackendEndpoint ep, int max_in_flight) : endpoint(std::move(ep)), gate(max_in_flight) {}
};

HttpChannel::HttpChannel(BackendEndpoint endpoint, int max_in_flight)
    : impl_(std::make_unique<Impl>(std::move(endpoint), max_in_flight)) {
    if (impl_->endpoint.base_url.empty()) {
        throw ConfigError("http backend: base_url is not configured");
    }
}

HttpChannel::~HttpChannel() = default;

std::string HttpChannel::encode_image(const cv::Mat& image) {
    std::vector<unsigned char> png;
    if (!cv::imencode(".png", image, png)) {
        throw ContractError("http backend: cannot encode request image");
    }
    return base64_encode(png);
}

json HttpChannel::post(const std::string& path, const json& body) {
    GateHold hold(impl_->gate);

    const std::string payload = body.dump();
    std::string api_key;
    if (!impl_->endpoint.api_key_env.empty()) {
        if (const char* value = std::getenv(impl_->endpoint.api_key_env.c_str())) {
            api_key = value;
        }
    }

    const int attempts = impl_->endpoint.max_retries + 1;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        httplib::Client client(impl_->endpoint.base_url);
        client.set_connection_timeout(impl_->endpoint.timeout_ms / 1000,
                                      (impl_->endpoint.timeout_ms % 1000) * 1000);
        client.set_read_timeout(impl_->endpoint.timeout_ms / 1000,
                                (impl_->endpoint.timeout_ms % 1000) * 1000);
        client.set_write_timeout(impl_->endpoint.timeout_ms / 1000,
                                 (impl_->endpoint.timeout_ms % 1000) * 1000);
        if (!api_key.empty()) {
            client.set_bearer_token_auth(api_key);
        }

        httplib::Result result = client.Post(path, payload, "application/json");
        if (!result) {
            const bool timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                                   result.error() == httplib::Error::Read ||
                                   result.error() == httplib::Error::Write;
            last_error = httplib::to_string(result.error());
            if (attempt + 1 == attempts) {
                const std::string msg =
                    "http backend: " + path + " failed after " + std::to_string(attempts) +
                    " attempts: " + last_error;
                if (timed_out) throw BackendTimeout(msg);
                throw TransportError(msg);
            }
            continue;
        }
        if (result->status >= 500) {
            last_error = "server status " + std::to_string(result->status);
            if (attempt + 1 == attempts) {
                throw TransportError("http backend: " + path + " failed after " +
                                     std::to_string(attempts) + " attempts: " + last_error);
            }
            continue;
        }
        if (result->status != 200) {
            throw BackendError("http backend: " + path + " returned status " +
                                   std::to_string(result->status) + ": " + result->body,
                               /*retryable=*/false);
        }
        try {
            return json::parse(result->body);
        } catch (const json::exception& e) {
            throw MalformedResponseError("http backend: " + path +
                                         " returned invalid JSON: " + e.what());
        }
    }
    throw TransportError("http backend: " + path + " failed: " + last_error);
}

std::string fill_template(std::string text,
                          const std::vector<std::pair<std::string, std::string>>& values) {
    for (const auto& [key, value] : values) {
        const std::string marker = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = text.find(marker, pos)) != std::string::npos) {
            text.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    return text;
}

namespace {

std::string join_strings(const std::vector<std::string>& parts) {
    std::string out;
    for (const std::string& part : parts) {
        if (!out.empty()) out += ", ";
        out += part;
    }
    return out;
}

std::string join_fields(const std::vector<FieldKind>& fields) {
    std::vector<std::string> names;
    names.reserve(fields.size());
    for (FieldKind field : fields) names.emplace_back(field_kind_name(field));
    return join_strings(names);
}

}  // namespace

HttpVlm::HttpVlm(const EngineConfig& config) : channel_(config.vlm, config.max_in_flight) {}

std::vector<ScoredBox> HttpVlm::propose_raw(const VlmRequest& request) {
    const json body{
        {"image_png_b64", HttpChannel::encode_image(request.image)},
        {"prompt", request.prompt},
        {"score_threshold", request.score_threshold},
        {"max_detections", request.max_detections},
    };
    const json reply = channel_.post("/v1/vlm/propose", body);
    // The wire carries normalized [0,1] coordinates; scale by the raster side.
    return wire::scored_boxes_from_json(reply, static_cast<double>(request.image.cols),
                                        request.image.cols, request.image.rows,
                                        CoordSpace::model_space);
}

HttpMllm::HttpMllm(const EngineConfig& config)
    : channel_(config.mllm, config.max_in_flight), prompts_(config.prompts) {}

std::string HttpMllm::select_label_raw(const cv::Mat& overlay, FieldKind target,
                                       const std::vector<std::string>& live_labels,
                                       const std::vector<std::string>& memory) {
    const json body{
        {"image_png_b64", HttpChannel::encode_image(overlay)},
        {"target_field", field_kind_name(target)},
        {"live_labels", live_labels},
        {"rejected_labels", memory},
        {"prompt", fill_template(prompts_.select,
                                 {{"field", std::string(field_kind_name(target))},
                                  {"labels", join_strings(live_labels)},
                                  {"memory", memory.empty() ? "none" : join_strings(memory)}})},
    };
    return wire::label_from_json(channel_.post("/v1/mllm/select", body));
}

MllmVerdict HttpMllm::evaluate_raw(const cv::Mat& single_box_render, FieldKind target) {
    const json body{
        {"image_png_b64", HttpChannel::encode_image(single_box_render)},
        {"target_field", field_kind_name(target)},
        {"prompt", fill_template(prompts_.evaluate,
                                 {{"field", std::string(field_kind_name(target))}})},
    };
    return wire::verdict_from_json(channel_.post("/v1/mllm/evaluate", body));
}

std::map<std::string, std::string> HttpMllm::ocr_stack_raw(
    const cv::Mat& page, const std::vector<std::string>& labels) {
    const json body{
        {"image_png_b64", HttpChannel::encode_image(page)},
        {"labels", labels},
        {"prompt", fill_template(prompts_.ocr, {{"labels", join_strings(labels)}})},
    };
    return wire::ocr_texts_from_json(channel_.post("/v1/mllm/ocr", body));
}

std::map<FieldKind, std::optional<std::string>> HttpMllm::ner_raw(
    const CheckImage& image, const std::vector<FieldKind>& fields) {
    std::vector<std::string> names;
    names.reserve(fields.size());
    for (FieldKind field : fields) names.emplace_back(field_kind_name(field));
    const json body{
        {"image_png_b64", HttpChannel::encode_image(image.pixels)},
        {"fields", names},
        {"prompt", fill_template(prompts_.ner, {{"fields", join_fields(fields)}})},
    };
    return wire::ner_fields_from_json(channel_.post("/v1/mllm/ner", body));
}

}  // namespace checkfield
