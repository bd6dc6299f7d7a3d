#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <opencv2/imgproc.hpp>

#include "checkfield/errors.hpp"
#include "checkfield/image.hpp"
#include "checkfield/render.hpp"

using namespace checkfield;

namespace {

CheckImage test_image(int width, int height, int seed = 0) {
    cv::Mat mat(height, width, CV_8UC3);
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> value(0, 255);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            mat.at<cv::Vec3b>(y, x) = cv::Vec3b(static_cast<unsigned char>(value(rng)),
                                                static_cast<unsigned char>(value(rng)),
                                                static_cast<unsigned char>(value(rng)));
        }
    }
    return CheckImage::from_mat(mat, "test");
}

CandidateSet set_of(std::vector<ScoredBox> boxes, double w, double h) {
    return CandidateSet::make("texts", std::move(boxes), w, h);
}

BoundingBox obox(double x1, double y1, double x2, double y2) {
    return BoundingBox(x1, y1, x2, y2, CoordSpace::original_space);
}

}  // namespace

TEST_CASE("resize_pad yields exactly 960x960x3") {
    for (auto [w, h] : std::vector<std::pair<int, int>>{{960, 960}, {1920, 960}, {640, 480},
                                                        {1200, 560}, {100, 3000}}) {
        const auto [model, transform] = resize_pad(test_image(w, h));
        CHECK(model.cols == 960);
        CHECK(model.rows == 960);
        CHECK(model.channels() == 3);
        CHECK(transform.pad_right >= 0);
        CHECK(transform.pad_bottom >= 0);
    }
}

TEST_CASE("resize_pad square input is the identity") {
    const auto [model, transform] = resize_pad(test_image(960, 960));
    CHECK(transform.scale == doctest::Approx(1.0));
    CHECK(transform.pad_right == 0);
    CHECK(transform.pad_bottom == 0);
}

TEST_CASE("resize_pad wide input scales down and pads the bottom") {
    const auto [model, transform] = resize_pad(test_image(1920, 960));
    CHECK(transform.scale == doctest::Approx(0.5));
    CHECK(transform.pad_right == 0);
    CHECK(transform.pad_bottom == 480);
    // padding is the fixed mid-gray
    CHECK(model.at<cv::Vec3b>(959, 0) == cv::Vec3b(128, 128, 128));
}

TEST_CASE("resize_pad small input scales up") {
    const auto [model, transform] = resize_pad(test_image(640, 480));
    CHECK(transform.scale == doctest::Approx(1.5));
    CHECK(transform.pad_right == 0);
    CHECK(transform.pad_bottom == 240);
}

TEST_CASE("point round trip stays within half a pixel") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> dim(32, 2400);
    for (int round = 0; round < 10; ++round) {
        const int w = dim(rng);
        const int h = dim(rng);
        const auto [model, transform] = resize_pad(test_image(w, h, round));
        std::uniform_real_distribution<double> px(0.0, w - 1.0);
        std::uniform_real_distribution<double> py(0.0, h - 1.0);
        for (int i = 0; i < 20; ++i) {
            const double x = px(rng);
            const double y = py(rng);
            CHECK(std::abs(transform.to_original_x(transform.to_model_x(x)) - x) < 0.5);
            CHECK(std::abs(transform.to_original_y(transform.to_model_y(y)) - y) < 0.5);
        }
    }
}

TEST_CASE("to_original inverts the scale and clamps into the image") {
    const auto [model, transform] = resize_pad(test_image(1920, 960));  // scale 0.5
    const BoundingBox mapped =
        to_original(BoundingBox(100, 100, 200, 200, CoordSpace::model_space), transform, 1920, 960);
    CHECK(mapped == obox(200, 200, 400, 400));

    // overlapping the padding: clamped back to the content edge
    const BoundingBox spills =
        to_original(BoundingBox(0, 400, 100, 600, CoordSpace::model_space), transform, 1920, 960);
    CHECK(spills.y2 == doctest::Approx(960.0));

    // entirely inside the padding
    CHECK_THROWS_AS(
        to_original(BoundingBox(0, 500, 100, 600, CoordSpace::model_space), transform, 1920, 960),
        OutOfContentError);

    CHECK_THROWS_AS(to_original(obox(0, 0, 10, 10), transform, 1920, 960), ContractError);
}

TEST_CASE("forward then inverse box mapping is the identity for content boxes") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> dim(200, 2000);
    for (int round = 0; round < 10; ++round) {
        const int w = dim(rng);
        const int h = dim(rng);
        const auto [model, transform] = resize_pad(test_image(w, h, round + 50));
        std::uniform_real_distribution<double> px(0.0, w / 2.0);
        std::uniform_real_distribution<double> py(0.0, h / 2.0);
        for (int i = 0; i < 20; ++i) {
            const BoundingBox original = obox(px(rng), py(rng), w / 2.0 + px(rng) + 1.0,
                                              h / 2.0 + py(rng) + 1.0);
            const BoundingBox round_trip =
                to_original(transform.to_model(original), transform, w, h);
            CHECK(std::abs(round_trip.x1 - original.x1) < 0.5);
            CHECK(std::abs(round_trip.y1 - original.y1) < 0.5);
            CHECK(std::abs(round_trip.x2 - original.x2) < 0.5);
            CHECK(std::abs(round_trip.y2 - original.y2) < 0.5);
        }
    }
}

TEST_CASE("overlay with no candidates copies the image") {
    const CheckImage image = test_image(300, 200);
    const cv::Mat overlay = overlay_labels(image, set_of({}, 300, 200));
    CHECK(image_content_hash(overlay) == image_content_hash(image.pixels));
}

TEST_CASE("overlay draws boxes deterministically") {
    const CheckImage image = test_image(400, 300);
    const CandidateSet set = set_of({ScoredBox(obox(50, 60, 150, 120), 0.9),
                                     ScoredBox(obox(200, 100, 320, 180), 0.5)},
                                    400, 300);
    const cv::Mat a = overlay_labels(image, set);
    const cv::Mat b = overlay_labels(image, set);
    CHECK(image_content_hash(a) == image_content_hash(b));
    CHECK(image_content_hash(a) != image_content_hash(image.pixels));

    // single-box render differs from the full overlay
    const cv::Mat single = render_single_box(image, set.entries()[0].scored.box, "O-1");
    CHECK(image_content_hash(single) != image_content_hash(a));
}

TEST_CASE("overlay handles many overlapping boxes") {
    const CheckImage image = test_image(960, 480);
    std::vector<ScoredBox> boxes;
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> x(0.0, 700.0);
    std::uniform_real_distribution<double> y(0.0, 300.0);
    for (int i = 0; i < 30; ++i) {
        const double bx = x(rng), by = y(rng);
        boxes.push_back(ScoredBox(obox(bx, by, bx + 150, by + 80), (30.0 - i) / 31.0));
    }
    const CandidateSet set = set_of(boxes, 960, 480);
    CHECK_NOTHROW(overlay_labels(image, set));
}

TEST_CASE("stack paging follows the ceil(n/7) split") {
    const CheckImage image = test_image(800, 600);
    for (int n = 1; n <= 20; ++n) {
        std::vector<ScoredBox> boxes;
        for (int i = 0; i < n; ++i) {
            const double y = 20.0 * i + 1;
            boxes.push_back(ScoredBox(obox(10, y, 110 + i, y + 18), (n - i) / (n + 1.0)));
        }
        const CandidateSet set = set_of(boxes, 800, 600);
        const std::vector<StackPage> pages = compose_stack(image, set);

        CHECK(pages.size() == static_cast<std::size_t>((n + 6) / 7));
        std::vector<std::string> labels;
        for (const StackPage& page : pages) {
            CHECK(page.entries.size() <= 7);
            CHECK(!page.entries.empty());
            for (const auto& entry : page.entries) labels.push_back(entry.label);
        }
        CHECK(labels == set.labels());
        if (n > 7) CHECK(pages[0].entries.size() == 7);
    }
}

TEST_CASE("stack crops carry the exact source pixels") {
    const CheckImage image = test_image(640, 480, 9);
    const CandidateSet set = set_of({ScoredBox(obox(40, 50, 200, 120), 0.9),
                                     ScoredBox(obox(300, 200, 420, 260), 0.5)},
                                    640, 480);
    const std::vector<StackPage> pages = compose_stack(image, set);
    REQUIRE(pages.size() == 1);
    const StackPage& page = pages[0];
    REQUIRE(page.entries.size() == 2);

    int y = 0;
    for (const auto& entry : page.entries) {
        const cv::Rect source(static_cast<int>(entry.source_box.x1),
                              static_cast<int>(entry.source_box.y1),
                              static_cast<int>(entry.source_box.width()),
                              static_cast<int>(entry.source_box.height()));
        const cv::Mat expected = image.pixels(source);
        const cv::Mat actual = page.image(cv::Rect(64, y, source.width, source.height));
        CHECK(image_content_hash(expected) == image_content_hash(actual));
        y += source.height + 4;
    }
}

TEST_CASE("empty candidate set stacks to no pages") {
    const CheckImage image = test_image(100, 100);
    CHECK(compose_stack(image, set_of({}, 100, 100)).empty());
}

TEST_CASE("compose_stack is deterministic") {
    const CheckImage image = test_image(500, 400, 2);
    const CandidateSet set = set_of({ScoredBox(obox(10, 10, 100, 60), 0.8),
                                     ScoredBox(obox(120, 100, 300, 160), 0.6),
                                     ScoredBox(obox(50, 200, 220, 280), 0.4)},
                                    500, 400);
    const auto pages_a = compose_stack(image, set);
    const auto pages_b = compose_stack(image, set);
    REQUIRE(pages_a.size() == pages_b.size());
    for (std::size_t i = 0; i < pages_a.size(); ++i) {
        CHECK(image_content_hash(pages_a[i].image) == image_content_hash(pages_b[i].image));
    }
}

TEST_CASE("degenerate images are rejected") {
    CHECK_THROWS_AS(CheckImage::from_mat(cv::Mat(), "x"), InputError);
    CHECK_THROWS_AS(CheckImage::load("/nonexistent/file.png"), InputError);
}
