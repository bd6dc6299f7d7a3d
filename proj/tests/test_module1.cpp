#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "checkfield/errors.hpp"
#include "checkfield/module1.hpp"
#include "checkfield/render.hpp"
#include "checkfield/replay.hpp"
#include "checkfield/testkit/synthetic.hpp"

using namespace checkfield;

namespace {

CheckImage blank_check(int w = 600, int h = 300) {
    return CheckImage::from_mat(cv::Mat(h, w, CV_8UC3, cv::Scalar(240, 240, 240)), "check");
}

CandidateSet candidates_of(int count, double w = 600, double h = 300) {
    std::vector<ScoredBox> boxes;
    for (int i = 0; i < count; ++i) {
        const double x = 20.0 + 90.0 * i;
        boxes.push_back(ScoredBox(BoundingBox(x, 40, x + 70, 110, CoordSpace::original_space),
                                  (count - i) / (count + 1.0)));
    }
    return CandidateSet::make("signature", std::move(boxes), w, h);
}

// Select walks the live list front to back; the evaluator rejects everything.
testkit::LambdaMllm all_fail_mllm() {
    testkit::LambdaMllm mllm;
    mllm.on_select = [](const cv::Mat&, FieldKind, const std::vector<std::string>& live,
                        const std::vector<std::string>&) { return live.front(); };
    mllm.on_evaluate = [](const cv::Mat&, FieldKind) {
        return MllmVerdict{MllmVerdict::Grade::fail, "not the signature"};
    };
    return mllm;
}

}  // namespace

TEST_CASE("single candidate passing on the first turn") {
    const CheckImage image = blank_check();
    const CandidateSet set = candidates_of(1);

    testkit::LambdaMllm mllm;
    mllm.on_select = [](const cv::Mat&, FieldKind, const std::vector<std::string>& live,
                        const std::vector<std::string>&) { return live.front(); };
    mllm.on_evaluate = [](const cv::Mat&, FieldKind) {
        return MllmVerdict{MllmVerdict::Grade::pass, "covers the signature"};
    };

    const LoopOutcome outcome = detect_signature(image, set, 10, mllm);
    REQUIRE(outcome.found());
    CHECK(outcome.iterations_used == 1);
    CHECK(outcome.transcript.size() == 1);
    CHECK(outcome.transcript.back().verdict.passed());
    CHECK(outcome.detection->provenance.module == 1);
    CHECK(outcome.detection->provenance.selected_label == "O-1");
}

TEST_CASE("two failures then a pass grows memory and shrinks the live set") {
    const CheckImage image = blank_check();
    const CandidateSet set = candidates_of(4);

    testkit::LambdaMllm mllm;
    // prefers O-2, then O-4, then O-3 (the true signature)
    const std::vector<std::string> preference = {"O-2", "O-4", "O-3"};
    mllm.on_select = [&](const cv::Mat&, FieldKind, const std::vector<std::string>& live,
                         const std::vector<std::string>& memory) {
        // the loop never offers a remembered label
        for (const std::string& m : memory) {
            CHECK(std::find(live.begin(), live.end(), m) == live.end());
        }
        for (const std::string& p : preference) {
            if (std::find(live.begin(), live.end(), p) != live.end()) return p;
        }
        return live.front();
    };
    mllm.on_evaluate = [&](const cv::Mat& render, FieldKind) {
        // identify the render by comparing against each candidate's render
        for (const auto& entry : set.entries()) {
            if (image_content_hash(render) ==
                image_content_hash(render_single_box(image, entry.scored.box, entry.label))) {
                if (entry.label == "O-3") {
                    return MllmVerdict{MllmVerdict::Grade::pass, "signature box"};
                }
                return MllmVerdict{MllmVerdict::Grade::fail,
                                   entry.label + " covers something else"};
            }
        }
        return MllmVerdict{MllmVerdict::Grade::fail, "unknown render"};
    };

    const LoopOutcome outcome = detect_signature(image, set, 10, mllm);
    REQUIRE(outcome.found());
    CHECK(outcome.iterations_used == 3);
    REQUIRE(outcome.transcript.size() == 3);

    CHECK(outcome.transcript[0].label == "O-2");
    CHECK(!outcome.transcript[0].verdict.passed());
    CHECK(outcome.transcript[0].live_count == 4);
    CHECK(outcome.transcript[0].memory_size == 0);

    CHECK(outcome.transcript[1].label == "O-4");
    CHECK(!outcome.transcript[1].verdict.passed());
    CHECK(outcome.transcript[1].live_count == 3);
    CHECK(outcome.transcript[1].memory_size == 1);

    CHECK(outcome.transcript[2].label == "O-3");
    CHECK(outcome.transcript[2].verdict.passed());
    CHECK(outcome.transcript[2].live_count == 2);
    CHECK(outcome.transcript[2].memory_size == 2);

    CHECK(outcome.detection->provenance.selected_label == "O-3");
    CHECK(outcome.detection->provenance.iterations == 3);
}

TEST_CASE("t_max of one with a failing pick exhausts immediately") {
    const CheckImage image = blank_check();
    testkit::LambdaMllm mllm = all_fail_mllm();
    const LoopOutcome outcome = detect_signature(image, candidates_of(3), 1, mllm);
    CHECK(!outcome.found());
    CHECK(outcome.iterations_used == 1);
    CHECK(outcome.transcript.size() == 1);
    CHECK(!outcome.diagnostic.empty());
}

TEST_CASE("empty candidate set exhausts with an empty transcript") {
    const CheckImage image = blank_check();
    testkit::LambdaMllm mllm = all_fail_mllm();
    const LoopOutcome outcome =
        detect_signature(image, CandidateSet::make("signature", {}, 600, 300), 5, mllm);
    CHECK(!outcome.found());
    CHECK(outcome.iterations_used == 0);
    CHECK(outcome.transcript.empty());
}

TEST_CASE("loop terminates within min(t_max, candidate count)") {
    const CheckImage image = blank_check();
    for (int candidates = 0; candidates <= 5; ++candidates) {
        for (int t_max = 1; t_max <= 7; t_max += 3) {
            testkit::LambdaMllm mllm = all_fail_mllm();  // everything fails
            const LoopOutcome outcome =
                detect_signature(image, candidates_of(candidates), t_max, mllm);
            CHECK(!outcome.found());
            CHECK(outcome.iterations_used == std::min(t_max, candidates));
            CHECK(outcome.transcript.size() == static_cast<std::size_t>(outcome.iterations_used));
        }
    }
}

TEST_CASE("memory strictly grows on every fail and the actor never sees it") {
    const CheckImage image = blank_check();
    const CandidateSet set = candidates_of(5);
    std::set<std::string> offered_after_rejection;

    testkit::LambdaMllm mllm;
    std::vector<std::string> rejected;
    mllm.on_select = [&](const cv::Mat&, FieldKind, const std::vector<std::string>& live,
                         const std::vector<std::string>& memory) {
        CHECK(memory.size() == rejected.size());
        CHECK(live.size() + memory.size() == 5);
        for (const std::string& r : rejected) {
            CHECK(std::find(live.begin(), live.end(), r) == live.end());
        }
        return live.front();
    };
    mllm.on_evaluate = [&](const cv::Mat&, FieldKind) {
        return MllmVerdict{MllmVerdict::Grade::fail, "wrong box"};
    };
    // track what the loop reports rejecting, via the transcript afterwards
    const LoopOutcome outcome = detect_signature(image, set, 10, mllm);
    CHECK(!outcome.found());
    CHECK(outcome.iterations_used == 5);
    for (std::size_t i = 0; i < outcome.transcript.size(); ++i) {
        CHECK(outcome.transcript[i].memory_size == static_cast<int>(i));
        CHECK(outcome.transcript[i].live_count == static_cast<int>(5 - i));
    }
}

TEST_CASE("protocol violations propagate after one retry") {
    const CheckImage image = blank_check();
    int select_calls = 0;
    testkit::LambdaMllm mllm;
    mllm.on_select = [&](const cv::Mat&, FieldKind, const std::vector<std::string>&,
                         const std::vector<std::string>&) {
        ++select_calls;
        return std::string("NOT-A-LABEL");
    };
    mllm.on_evaluate = [](const cv::Mat&, FieldKind) {
        return MllmVerdict{MllmVerdict::Grade::pass, ""};
    };
    CHECK_THROWS_AS(detect_signature(image, candidates_of(2), 5, mllm), ProtocolViolationError);
    CHECK(select_calls == 2);  // original call plus exactly one retry
}

TEST_CASE("a transient violation recovers on the retry") {
    const CheckImage image = blank_check();
    int select_calls = 0;
    testkit::LambdaMllm mllm;
    mllm.on_select = [&](const cv::Mat&, FieldKind, const std::vector<std::string>& live,
                         const std::vector<std::string>&) {
        return ++select_calls == 1 ? std::string("garbage") : live.front();
    };
    mllm.on_evaluate = [](const cv::Mat&, FieldKind) {
        return MllmVerdict{MllmVerdict::Grade::pass, "fine"};
    };
    const LoopOutcome outcome = detect_signature(image, candidates_of(2), 5, mllm);
    CHECK(outcome.found());
    CHECK(select_calls == 2);
}

TEST_CASE("identical replay scripts give identical outcomes") {
    // record the loop against a scripted backend, then replay twice
    EngineConfig config;
    const auto scenarios = testkit::standard_scenarios();
    const auto ambiguous =
        std::find_if(scenarios.begin(), scenarios.end(),
                     [](const auto& s) { return s.name == "check_ambiguous"; });
    REQUIRE(ambiguous != scenarios.end());
    const testkit::BuiltScenario built = testkit::build_scenario(*ambiguous, config);

    auto script = std::make_shared<const ReplayScript>(built.script);
    REQUIRE(built.signature_loop.has_value());

    auto run_once = [&]() {
        ReplayVlm vlm(script);
        ReplayMllm mllm(script);
        const auto [model, transform] = resize_pad(built.image);
        const CandidateSet set =
            vlm_candidates(built.image, model, transform, "signature", vlm, config);
        return detect_signature(built.image, set, config.t_max, mllm);
    };
    const LoopOutcome a = run_once();
    const LoopOutcome b = run_once();

    CHECK(a.transcript_json() == b.transcript_json());
    CHECK(a.transcript_json() == built.signature_loop->transcript_json());
    REQUIRE(a.found());
    CHECK(a.iterations_used == 3);  // two scripted wrong picks, then the pass
    CHECK(a.transcript[0].verdict.passed() == false);
    CHECK(a.transcript[1].verdict.passed() == false);
    CHECK(a.transcript[2].verdict.passed() == true);
}
