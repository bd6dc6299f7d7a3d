#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "checkfield/errors.hpp"
#include "checkfield/http_backend.hpp"
#include "checkfield/replay.hpp"
#include "checkfield/testkit/synthetic.hpp"
#include "checkfield/wire.hpp"

using namespace checkfield;
using nlohmann::json;

namespace {

cv::Mat gray_raster(int w, int h, unsigned char value) {
    return cv::Mat(h, w, CV_8UC3, cv::Scalar(value, value, value));
}

VlmRequest request_for(const cv::Mat& image, const std::string& prompt,
                       double threshold = 0.01, int max_detections = 3600) {
    VlmRequest request;
    request.image = image;
    request.prompt = prompt;
    request.score_threshold = threshold;
    request.max_detections = max_detections;
    return request;
}

std::shared_ptr<const ReplayScript> script_with(const std::string& fingerprint,
                                                const std::string& kind, json response) {
    auto script = std::make_shared<ReplayScript>("test");
    script->add(fingerprint, ReplayScript::Entry{kind, "", std::move(response)});
    return script;
}

}  // namespace

TEST_CASE("fingerprints are stable and sensitive to inputs") {
    const cv::Mat a = gray_raster(64, 64, 10);
    const cv::Mat b = gray_raster(64, 64, 11);
    CHECK(fingerprint_vlm("texts", a) == fingerprint_vlm("texts", a));
    CHECK(fingerprint_vlm("texts", a) != fingerprint_vlm("check fields", a));
    CHECK(fingerprint_vlm("texts", a) != fingerprint_vlm("texts", b));
    CHECK(fingerprint_select(FieldKind::signature, a) !=
          fingerprint_evaluate(FieldKind::signature, a));
    CHECK(fingerprint_ocr({"O-1"}, a) != fingerprint_ocr({"O-1", "O-2"}, a));
    // pinned value: the fixture format depends on it staying put
    CHECK(fingerprint_vlm("texts", a).size() == 16);
}

TEST_CASE("replay script round-trips through a file and rejects duplicates") {
    ReplayScript script("demo");
    script.add("abc", ReplayScript::Entry{"vlm", "note", json{{"boxes", json::array()}}});
    CHECK_THROWS_AS(script.add("abc", ReplayScript::Entry{"vlm", "", json::object()}),
                    InputError);

    const auto path = std::filesystem::temp_directory_path() / "cf_replay_test.json";
    script.save(path);
    const ReplayScript loaded = ReplayScript::load(path);
    CHECK(loaded.scenario() == "demo");
    CHECK(loaded.size() == 1);
    CHECK(loaded.lookup("abc", "ctx").kind == "vlm");
    std::filesystem::remove(path);
}

TEST_CASE("unmatched replay lookups fail loudly") {
    const ReplayScript script("empty");
    CHECK_THROWS_AS(script.lookup("nope", "vlm prompt 'texts'"), MissingFixtureError);

    ReplayVlm vlm(std::make_shared<const ReplayScript>("empty"));
    CHECK_THROWS_AS(vlm.propose(request_for(gray_raster(32, 32, 0), "texts")),
                    MissingFixtureError);
}

TEST_CASE("replay vlm returns the scripted boxes with contract enforcement") {
    const cv::Mat raster = gray_raster(960, 960, 50);
    const json response{{"boxes",
                         {{{"box", {10.0, 10.0, 110.0, 60.0}}, {"score", 0.5}},
                          {{"box", {200.0, 200.0, 400.0, 300.0}}, {"score", 0.9}},
                          {{"box", {5.0, 5.0, 50.0, 40.0}}, {"score", 0.005}}}}};
    ReplayVlm vlm(script_with(fingerprint_vlm("texts", raster), "vlm", response));

    SUBCASE("threshold filters and scores sort descending") {
        const auto boxes = vlm.propose(request_for(raster, "texts", 0.01));
        REQUIRE(boxes.size() == 2);
        CHECK(boxes[0].score == 0.9);
        CHECK(boxes[1].score == 0.5);
    }
    SUBCASE("threshold above every score yields nothing") {
        CHECK(vlm.propose(request_for(raster, "texts", 0.95 * 0.03 + 0.0005)).empty());
    }
    SUBCASE("max_detections truncates after sorting") {
        const auto boxes = vlm.propose(request_for(raster, "texts", 0.001, 1));
        REQUIRE(boxes.size() == 1);
        CHECK(boxes[0].score == 0.9);
    }
}

TEST_CASE("replay vlm drops degenerate boxes after clamping") {
    const cv::Mat raster = gray_raster(960, 960, 51);
    const json response{{"boxes",
                         {{{"box", {-50.0, -50.0, -10.0, -10.0}}, {"score", 0.9}},
                          {{"box", {900.0, 900.0, 2000.0, 2000.0}}, {"score", 0.8}}}}};
    ReplayVlm vlm(script_with(fingerprint_vlm("texts", raster), "vlm", response));
    const auto boxes = vlm.propose(request_for(raster, "texts"));
    REQUIRE(boxes.size() == 1);  // first box is gone, second clamps to the raster
    CHECK(boxes[0].box.x2 == 960.0);
}

TEST_CASE("select contract: out-of-set replies are protocol violations") {
    const cv::Mat overlay = gray_raster(100, 100, 5);
    ReplayMllm mllm(script_with(fingerprint_select(FieldKind::signature, overlay), "select",
                                json{{"label", "O-99"}}));
    CHECK_THROWS_AS(mllm.select_label(overlay, FieldKind::signature, {"O-1", "O-2"}, {}),
                    ProtocolViolationError);
}

TEST_CASE("select contract: memory must not overlap the live labels") {
    testkit::LambdaMllm mllm;
    mllm.on_select = [](const cv::Mat&, FieldKind, const std::vector<std::string>& live,
                        const std::vector<std::string>&) { return live.front(); };
    const cv::Mat overlay = gray_raster(10, 10, 1);
    CHECK_THROWS_AS(mllm.select_label(overlay, FieldKind::signature, {}, {}), ContractError);
    CHECK_THROWS_AS(mllm.select_label(overlay, FieldKind::signature, {"O-1"}, {"O-1"}),
                    ContractError);
    CHECK(mllm.select_label(overlay, FieldKind::signature, {"O-1"}, {"O-2"}) == "O-1");
}

TEST_CASE("evaluate contract: Fail needs an explanation") {
    const cv::Mat render = gray_raster(100, 100, 7);
    SUBCASE("scripted fail with feedback passes through") {
        ReplayMllm mllm(script_with(
            fingerprint_evaluate(FieldKind::signature, render), "evaluate",
            json{{"grade", "Fail"}, {"explanation", "box covers the date, not the signature"}}));
        const MllmVerdict verdict = mllm.evaluate(render, FieldKind::signature);
        CHECK(!verdict.passed());
        CHECK(verdict.explanation == "box covers the date, not the signature");
    }
    SUBCASE("scripted pass") {
        ReplayMllm mllm(script_with(fingerprint_evaluate(FieldKind::signature, render), "evaluate",
                                    json{{"grade", "Pass"}, {"explanation", "looks right"}}));
        CHECK(mllm.evaluate(render, FieldKind::signature).passed());
    }
    SUBCASE("fail without explanation is malformed") {
        ReplayMllm mllm(script_with(fingerprint_evaluate(FieldKind::signature, render), "evaluate",
                                    json{{"grade", "Fail"}, {"explanation", ""}}));
        CHECK_THROWS_AS(mllm.evaluate(render, FieldKind::signature), MalformedResponseError);
    }
    SUBCASE("free-text grades are rejected") {
        ReplayMllm mllm(script_with(fingerprint_evaluate(FieldKind::signature, render), "evaluate",
                                    json{{"grade", "maybe"}, {"explanation", "?"}}));
        CHECK_THROWS_AS(mllm.evaluate(render, FieldKind::signature), MalformedResponseError);
    }
}

TEST_CASE("ocr merges a two-turn replay sequence") {
    const cv::Mat page = gray_raster(200, 120, 9);
    ReplayScript script("two-turn");
    // first reply misses O-2, the re-prompt for O-2 alone completes it
    script.add(fingerprint_ocr({"O-1", "O-2", "O-3"}, page),
               ReplayScript::Entry{"ocr", "first", json{{"texts", {{"O-1", "alpha"}, {"O-3", ""}}}}});
    script.add(fingerprint_ocr({"O-2"}, page),
               ReplayScript::Entry{"ocr", "re-prompt", json{{"texts", {{"O-2", "beta"}}}}});
    ReplayMllm mllm(std::make_shared<const ReplayScript>(std::move(script)));

    const auto texts = mllm.ocr_stack(page, {"O-1", "O-2", "O-3"});
    REQUIRE(texts.size() == 3);
    CHECK(texts.at("O-1") == "alpha");
    CHECK(texts.at("O-2") == "beta");
    CHECK(texts.at("O-3").empty());  // empty string is a valid OCR result
}

TEST_CASE("ocr still incomplete after the re-prompt is an error") {
    testkit::LambdaMllm mllm;
    mllm.on_ocr = [](const cv::Mat&, const std::vector<std::string>& labels) {
        std::map<std::string, std::string> reply;
        for (const std::string& label : labels) {
            if (label != "O-2") reply[label] = "text";
        }
        return reply;
    };
    CHECK_THROWS_AS(mllm.ocr_stack(gray_raster(10, 10, 0), {"O-1", "O-2"}), OcrIncompleteError);
    CHECK_THROWS_AS(mllm.ocr_stack(gray_raster(10, 10, 0), {}), ContractError);
}

TEST_CASE("ner marks absent fields and rejects incomplete replies") {
    const CheckImage image = CheckImage::from_mat(gray_raster(80, 40, 3), "check");
    SUBCASE("absent marker round-trips") {
        ReplayMllm mllm(script_with(
            fingerprint_ner({FieldKind::date, FieldKind::memo}, image.pixels), "ner",
            json{{"fields", {{"date", "05/01/2024"}, {"memo", nullptr}}}}));
        const auto reply = mllm.ner(image, {FieldKind::date, FieldKind::memo});
        CHECK(reply.at(FieldKind::date) == "05/01/2024");
        CHECK(!reply.at(FieldKind::memo).has_value());
    }
    SUBCASE("empty reply is malformed") {
        ReplayMllm mllm(script_with(fingerprint_ner({FieldKind::date}, image.pixels), "ner",
                                    json{{"fields", json::object()}}));
        CHECK_THROWS_AS(mllm.ner(image, {FieldKind::date}), MalformedResponseError);
    }
    SUBCASE("signature is not an NER field") {
        testkit::LambdaMllm mllm;
        mllm.on_ner = [](const CheckImage&, const std::vector<FieldKind>&) {
            return std::map<FieldKind, std::optional<std::string>>{};
        };
        CHECK_THROWS_AS(mllm.ner(image, {FieldKind::signature}), ContractError);
    }
}

TEST_CASE("http client round-trips requests with retry on server errors") {
    httplib::Server server;
    std::atomic<int> propose_calls{0};
    std::string first_body, second_body;

    server.Post("/v1/vlm/propose", [&](const httplib::Request& req, httplib::Response& res) {
        const int call = ++propose_calls;
        if (call == 1) {
            first_body = req.body;
            res.status = 500;
            return;
        }
        second_body = req.body;
        const json body = json::parse(req.body);
        CHECK(body.contains("image_png_b64"));
        CHECK(body["prompt"] == "check fields");
        // normalized [0,1] coordinates on the wire
        res.set_content(
            json{{"boxes", {{{"box", {0.1, 0.2, 0.3, 0.4}}, {"score", 0.5}}}}}.dump(),
            "application/json");
    });
    server.Post("/v1/mllm/evaluate", [&](const httplib::Request& req, httplib::Response& res) {
        CHECK(req.get_header_value("Authorization") == "Bearer sekrit");
        res.set_content(json{{"grade", "Pass"}, {"explanation", "ok"}}.dump(),
                        "application/json");
    });
    server.Post("/v1/mllm/select", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 418;
        res.set_content("teapot", "text/plain");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    EngineConfig config;
    config.vlm.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.vlm.max_retries = 2;
    config.mllm = config.vlm;
    config.mllm.api_key_env = "CF_TEST_KEY";
    setenv("CF_TEST_KEY", "sekrit", 1);

    {
        HttpVlm vlm(config);
        const auto boxes = vlm.propose(request_for(gray_raster(960, 960, 9), "check fields"));
        CHECK(propose_calls == 2);          // one retry after the 500
        CHECK(first_body == second_body);   // retries resend the identical body
        REQUIRE(boxes.size() == 1);
        CHECK(boxes[0].box.x1 == doctest::Approx(96.0));   // 0.1 * 960
        CHECK(boxes[0].box.y2 == doctest::Approx(384.0));  // 0.4 * 960
    }
    {
        HttpMllm mllm(config);
        CHECK(mllm.evaluate(gray_raster(50, 50, 1), FieldKind::date).passed());
        // 4xx is terminal, not retried
        CHECK_THROWS_AS(mllm.select_label(gray_raster(50, 50, 2), FieldKind::signature,
                                          {"O-1"}, {}),
                        BackendError);
    }

    server.stop();
    server_thread.join();
}

TEST_CASE("http client reports unreachable hosts as transport errors") {
    EngineConfig config;
    config.vlm.base_url = "http://127.0.0.1:1";  // nothing listens there
    config.vlm.max_retries = 0;
    config.vlm.timeout_ms = 200;
    HttpVlm vlm(config);
    try {
        vlm.propose(request_for(gray_raster(960, 960, 2), "texts"));
        FAIL("expected a transport error");
    } catch (const BackendError& e) {
        CHECK(e.retryable());
    }
}

TEST_CASE("prompt templates substitute placeholders") {
    CHECK(fill_template("find the {field} now", {{"field", "memo"}}) == "find the memo now");
    CHECK(fill_template("{a}{a}{b}", {{"a", "x"}, {"b", "y"}}) == "xxy");
    CHECK(fill_template("no markers", {{"a", "x"}}) == "no markers");
}
