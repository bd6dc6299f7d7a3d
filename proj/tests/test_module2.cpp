#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "checkfield/errors.hpp"
#include "checkfield/module2.hpp"
#include "checkfield/render.hpp"
#include "checkfield/replay.hpp"
#include "checkfield/testkit/synthetic.hpp"

using namespace checkfield;

namespace {

CheckImage blank_check(int w = 800, int h = 400) {
    return CheckImage::from_mat(cv::Mat(h, w, CV_8UC3, cv::Scalar(245, 245, 245)), "check");
}

StackTexts texts_of(std::vector<std::pair<std::string, std::string>> entries) {
    StackTexts texts;
    texts.entries = std::move(entries);
    return texts;
}

CerMatrix::Row row_of(std::initializer_list<std::pair<const char*, double>> cells) {
    CerMatrix::Row row;
    for (const auto& [label, value] : cells) {
        row.emplace_back(label, CerScore{value, 10});
    }
    return row;
}

}  // namespace

TEST_CASE("cer matrix covers present fields times all candidates") {
    ReferenceSet refs;
    refs.entries[FieldKind::payer_name] = "PAY TO JOHN";
    refs.entries[FieldKind::date] = "01/02/2003";
    refs.entries[FieldKind::memo] = std::nullopt;              // absent: no row
    refs.entries[FieldKind::bank_name] = std::string{};        // empty: no row

    const StackTexts texts =
        texts_of({{"O-1", "PAY TO JOHN"}, {"O-2", "JOHN"}, {"O-3", "MEMO"}});
    const CerMatrix matrix = build_cer_matrix(refs, texts);

    CHECK(matrix.rows.size() == 2);
    CHECK(!matrix.rows.count(FieldKind::memo));
    CHECK(!matrix.rows.count(FieldKind::bank_name));
    REQUIRE(matrix.rows.count(FieldKind::payer_name));

    const CerMatrix::Row& row = matrix.rows.at(FieldKind::payer_name);
    REQUIRE(row.size() == 3);
    CHECK(row[0].second.value == doctest::Approx(0.0));
    CHECK(row[1].second.value == doctest::Approx(7.0 / 11.0));
    CHECK(row[2].second.value == doctest::Approx(10.0 / 11.0));
}

TEST_CASE("candidate text equal to the reference scores zero") {
    ReferenceSet refs;
    refs.entries[FieldKind::memo] = "Invoice 12";
    const CerMatrix matrix = build_cer_matrix(refs, texts_of({{"O-1", "Invoice 12"}}));
    CHECK(matrix.rows.at(FieldKind::memo)[0].second.value == 0.0);
}

TEST_CASE("survivor filtering is strictly below the threshold and CER-sorted") {
    const auto survivors = filter_candidates(
        row_of({{"O-1", 0.85}, {"O-2", 0.0}, {"O-3", 0.9}}), 0.8);
    REQUIRE(survivors.size() == 1);
    CHECK(survivors[0].label == "O-2");

    // the boundary value is excluded
    CHECK(filter_candidates(row_of({{"O-1", 0.8}}), 0.8).empty());
    CHECK(filter_candidates(row_of({{"O-1", 0.799}}), 0.8).size() == 1);

    // everything at or above the threshold: a legal empty outcome
    CHECK(filter_candidates(row_of({{"O-1", 0.9}, {"O-2", 1.4}}), 0.8).empty());

    const auto sorted = filter_candidates(
        row_of({{"O-1", 0.5}, {"O-2", 0.1}, {"O-3", 0.3}, {"O-4", 0.1}}), 0.8);
    REQUIRE(sorted.size() == 4);
    CHECK(sorted[0].label == "O-2");  // ties keep candidate order
    CHECK(sorted[1].label == "O-4");
    CHECK(sorted[2].label == "O-3");
    CHECK(sorted[3].label == "O-1");
}

TEST_CASE("a single survivor is selected without consulting the evaluator") {
    const CheckImage image = blank_check();
    const CandidateSet set = CandidateSet::make(
        "check fields",
        {ScoredBox(BoundingBox(100, 100, 300, 160, CoordSpace::original_space), 0.9)}, 800, 400);

    testkit::LambdaMllm mllm;
    int evaluate_calls = 0;
    mllm.on_evaluate = [&](const cv::Mat&, FieldKind) {
        ++evaluate_calls;
        return MllmVerdict{MllmVerdict::Grade::pass, "yes"};
    };

    const auto detection = select_detection(
        image, FieldKind::date, {Survivor{"O-1", CerScore{0.2, 10}}}, set, mllm, 10);
    REQUIRE(detection.has_value());
    CHECK(evaluate_calls == 0);
    CHECK(detection->provenance.iterations == 0);
    CHECK(detection->provenance.module == 2);
    CHECK(detection->provenance.cer->value == doctest::Approx(0.2));
}

TEST_CASE("evaluator disambiguates equal-CER survivors") {
    const CheckImage image = blank_check();
    // O-1 is the payer name, O-2 is the signature read as the same text
    const CandidateSet set = CandidateSet::make(
        "texts",
        {ScoredBox(BoundingBox(60, 50, 260, 100, CoordSpace::original_space), 0.9),
         ScoredBox(BoundingBox(500, 300, 760, 380, CoordSpace::original_space), 0.8)},
        800, 400);

    testkit::LambdaMllm mllm;
    std::vector<std::string> graded;
    mllm.on_evaluate = [&](const cv::Mat& render, FieldKind field) {
        for (const auto& entry : set.entries()) {
            if (image_content_hash(render) ==
                image_content_hash(render_single_box(image, entry.scored.box, entry.label))) {
                graded.push_back(entry.label);
                if (entry.label == "O-1" && field == FieldKind::payer_name) {
                    return MllmVerdict{MllmVerdict::Grade::pass, "payer name"};
                }
                return MllmVerdict{MllmVerdict::Grade::fail, "that is the signature"};
            }
        }
        return MllmVerdict{MllmVerdict::Grade::fail, "unknown render"};
    };

    const std::vector<Survivor> survivors = {Survivor{"O-1", CerScore{0.1, 10}},
                                             Survivor{"O-2", CerScore{0.1, 10}}};
    const auto detection =
        select_detection(image, FieldKind::payer_name, survivors, set, mllm, 10);
    REQUIRE(detection.has_value());
    CHECK(detection->provenance.selected_label == "O-1");
    CHECK(graded == std::vector<std::string>{"O-1", "O-2"});  // both ties graded
    CHECK(detection->provenance.iterations == 2);
}

TEST_CASE("equal CER passes tie-break by the smaller box area") {
    const CheckImage image = blank_check();
    const CandidateSet set = CandidateSet::make(
        "check fields",
        {ScoredBox(BoundingBox(100, 100, 130, 120, CoordSpace::original_space), 0.9),   // area 600
         ScoredBox(BoundingBox(300, 100, 330, 130, CoordSpace::original_space), 0.8)},  // area 900
        800, 400);

    testkit::LambdaMllm mllm;
    mllm.on_evaluate = [](const cv::Mat&, FieldKind) {
        return MllmVerdict{MllmVerdict::Grade::pass, "ok"};
    };

    SUBCASE("smaller area wins regardless of order") {
        const std::vector<Survivor> survivors = {Survivor{"O-2", CerScore{0.3, 10}},
                                                 Survivor{"O-1", CerScore{0.3, 10}}};
        const auto detection =
            select_detection(image, FieldKind::date, survivors, set, mllm, 10);
        REQUIRE(detection.has_value());
        CHECK(detection->provenance.selected_label == "O-1");  // 600 < 900
        CHECK(detection->box.area() == doctest::Approx(600.0));
    }
    SUBCASE("a strictly smaller CER beats a smaller area") {
        const std::vector<Survivor> survivors = {Survivor{"O-2", CerScore{0.1, 10}},
                                                 Survivor{"O-1", CerScore{0.3, 10}}};
        const auto detection =
            select_detection(image, FieldKind::date, survivors, set, mllm, 10);
        REQUIRE(detection.has_value());
        CHECK(detection->provenance.selected_label == "O-2");
        // the min-CER candidate passed; the 0.3 survivor is never rendered
        CHECK(detection->provenance.iterations == 1);
    }
}

TEST_CASE("no passing survivor leaves the field undetected") {
    const CheckImage image = blank_check();
    const CandidateSet set = CandidateSet::make(
        "check fields",
        {ScoredBox(BoundingBox(10, 10, 60, 40, CoordSpace::original_space), 0.9),
         ScoredBox(BoundingBox(100, 10, 150, 40, CoordSpace::original_space), 0.8)},
        800, 400);
    testkit::LambdaMllm mllm;
    int calls = 0;
    mllm.on_evaluate = [&](const cv::Mat&, FieldKind) {
        ++calls;
        return MllmVerdict{MllmVerdict::Grade::fail, "nope"};
    };
    const std::vector<Survivor> survivors = {Survivor{"O-1", CerScore{0.1, 10}},
                                             Survivor{"O-2", CerScore{0.2, 10}}};
    CHECK(!select_detection(image, FieldKind::memo, survivors, set, mllm, 10).has_value());
    CHECK(calls == 2);

    // t_max caps the number of evaluations
    calls = 0;
    CHECK(!select_detection(image, FieldKind::memo, survivors, set, mllm, 1).has_value());
    CHECK(calls == 1);

    CHECK(!select_detection(image, FieldKind::memo, {}, set, mllm, 10).has_value());
}

TEST_CASE("full pipeline on the clean scenario resolves every field") {
    EngineConfig config;
    const auto scenarios = testkit::standard_scenarios();
    const testkit::BuiltScenario built = testkit::build_scenario(scenarios[0], config);
    REQUIRE(built.spec.name == "check_clean");

    const DetectionResult& result = built.expected;
    for (FieldKind kind : all_field_kinds()) {
        REQUIRE(result.fields.count(kind));
        CHECK(result.fields.at(kind).status == FieldStatus::detected);
    }

    // detections framed where the scenario placed the fields
    for (const auto& field : built.spec.fields) {
        const auto& detection = result.fields.at(field.kind).detection;
        REQUIRE(detection.has_value());
        CHECK(iou(detection->box,
                  BoundingBox(field.x1, field.y1, field.x2, field.y2,
                              CoordSpace::original_space)) > 0.99);
    }

    // MICR spans the full width after widening
    const auto& micr = result.fields.at(FieldKind::micr).detection;
    CHECK(micr->box.x1 == 0.0);
    CHECK(micr->box.x2 == doctest::Approx(static_cast<double>(built.spec.width)));
    CHECK(micr->provenance.cer.has_value());

    // module assignment
    CHECK(result.fields.at(FieldKind::signature).detection->provenance.module == 1);
    CHECK(result.fields.at(FieldKind::date).detection->provenance.module == 2);
}

TEST_CASE("pipeline isolates missing prompts and absent references") {
    EngineConfig config;
    const auto scenarios = testkit::standard_scenarios();

    SUBCASE("sparse: memo absent, everything else detected") {
        const auto spec = std::find_if(scenarios.begin(), scenarios.end(),
                                       [](const auto& s) { return s.name == "check_sparse"; });
        REQUIRE(spec != scenarios.end());
        const testkit::BuiltScenario built = testkit::build_scenario(*spec, config);
        const DetectionResult& result = built.expected;

        CHECK(result.fields.at(FieldKind::memo).status == FieldStatus::undetected);
        CHECK(!result.ner.at(FieldKind::memo).has_value());
        for (FieldKind kind : all_field_kinds()) {
            if (kind == FieldKind::memo) continue;
            CHECK(result.fields.at(kind).status == FieldStatus::detected);
        }
    }

    SUBCASE("partial: empty prompt group and an unmatched reference stay isolated") {
        const auto spec = std::find_if(scenarios.begin(), scenarios.end(),
                                       [](const auto& s) { return s.name == "check_partial"; });
        REQUIRE(spec != scenarios.end());
        const testkit::BuiltScenario built = testkit::build_scenario(*spec, config);
        const DetectionResult& result = built.expected;

        // no "texts" proposals: those three fields are undetected, not errors
        for (FieldKind kind : {FieldKind::payer_name, FieldKind::payee_name,
                               FieldKind::bank_name}) {
            CHECK(result.fields.at(kind).status == FieldStatus::undetected);
        }
        // legal amount: reference exists but every candidate misses the bar
        CHECK(result.fields.at(FieldKind::legal_amount).status == FieldStatus::undetected);
        // the rest are fine
        for (FieldKind kind : {FieldKind::signature, FieldKind::date,
                               FieldKind::courtesy_amount, FieldKind::memo, FieldKind::micr}) {
            CHECK(result.fields.at(kind).status == FieldStatus::detected);
        }
    }
}

TEST_CASE("ambiguous scenario: ties, re-prompts, and paging work end to end") {
    EngineConfig config;
    const auto scenarios = testkit::standard_scenarios();
    const auto spec = std::find_if(scenarios.begin(), scenarios.end(),
                                   [](const auto& s) { return s.name == "check_ambiguous"; });
    REQUIRE(spec != scenarios.end());
    const testkit::BuiltScenario built = testkit::build_scenario(*spec, config);
    const DetectionResult& result = built.expected;

    for (FieldKind kind : all_field_kinds()) {
        CHECK(result.fields.at(kind).status == FieldStatus::detected);
    }

    // payer name resolved against the signature with the same text
    const auto& payer = result.fields.at(FieldKind::payer_name).detection;
    CHECK(payer->provenance.iterations == 2);
    CHECK(iou(payer->box, BoundingBox(80, 50, 340, 88, CoordSpace::original_space)) > 0.99);

    // date tie broken by area: the tight box, not the loose one
    const auto& date = result.fields.at(FieldKind::date).detection;
    CHECK(iou(date->box, BoundingBox(920, 110, 1110, 148, CoordSpace::original_space)) > 0.99);
    CHECK(date->provenance.iterations == 2);

    // signature took three turns
    REQUIRE(built.signature_loop.has_value());
    CHECK(built.signature_loop->iterations_used == 3);

    // the OCR dropout forced a re-prompt: the script holds an extra one-label
    // OCR request beyond the two pages of "texts" and one of "check fields"
    int ocr_entries = 0;
    for (const auto& item : built.script.to_json()["responses"]) {
        if (item["kind"] == "ocr") ++ocr_entries;
    }
    CHECK(ocr_entries == 4);
}

TEST_CASE("stack texts consolidate across pages in candidate order") {
    EngineConfig config;
    const auto scenarios = testkit::standard_scenarios();
    const auto spec = std::find_if(scenarios.begin(), scenarios.end(),
                                   [](const auto& s) { return s.name == "check_ambiguous"; });
    const testkit::BuiltScenario built = testkit::build_scenario(*spec, config);

    auto script = std::make_shared<const ReplayScript>(built.script);
    ReplayVlm vlm(script);
    ReplayMllm mllm(script);
    const auto [model, transform] = resize_pad(built.image);
    const CandidateSet set =
        vlm_candidates(built.image, model, transform, "texts", vlm, config);
    REQUIRE(set.size() == 9);  // needs two pages

    const StackTexts texts = ocr_candidates(built.image, set, mllm, config);
    CHECK(texts.labels() == set.labels());
}
