#include "checkfield/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include <opencv2/imgproc.hpp>

#include "checkfield/errors.hpp"
#include "checkfield/eval.hpp"
#include "checkfield/http_backend.hpp"
#include "checkfield/module2.hpp"
#include "checkfield/render.hpp"
#include "checkfield/replay.hpp"

namespace checkfield::cli {

using nlohmann::json;

namespace {

void write_json(const std::filesystem::path& path, const json& body) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << body.dump(2) << '\n';
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw InputError("input '" + dir.string() + "' is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw InputError("no check images (*.png, *.jpg) under '" + dir.string() + "'");
    }
    return files;
}

cv::Mat draw_detections(const CheckImage& image, const DetectionResult& result) {
    cv::Mat canvas = image.pixels.clone();
    for (const auto& [kind, field] : result.fields) {
        if (!field.detection.has_value()) continue;
        const BoundingBox& box = field.detection->box;
        const cv::Rect rect(static_cast<int>(box.x1), static_cast<int>(box.y1),
                            std::max(1, static_cast<int>(box.width())),
                            std::max(1, static_cast<int>(box.height())));
        cv::rectangle(canvas, rect & cv::Rect(0, 0, canvas.cols, canvas.rows), cv::Scalar(0, 160, 0), 2);
        cv::putText(canvas, std::string(field_kind_name(kind)),
                    cv::Point(rect.x, std::max(12, rect.y - 4)), cv::FONT_HERSHEY_SIMPLEX, 0.5,
                    cv::Scalar(0, 160, 0), 1, cv::LINE_8);
    }
    return canvas;
}

struct Checkpoint {
    std::set<std::string> completed;

    static Checkpoint load(const std::filesystem::path& path) {
        Checkpoint checkpoint;
        std::ifstream in(path);
        if (!in) return checkpoint;
        json body;
        try {
            in >> body;
        } catch (const json::exception&) {
            return checkpoint;
        }
        for (const json& id : body.value("completed", json::array())) {
            checkpoint.completed.insert(id.get<std::string>());
        }
        return checkpoint;
    }

    void save(const std::filesystem::path& path) const {
        write_json(path, json{{"completed", std::vector<std::string>(completed.begin(),
                                                                     completed.end())}});
    }
};

struct CheckRecord {
    std::string source_id;
    std::string status;  // ok | skipped | failed
    std::string note;
    std::map<FieldKind, FieldStatus> field_status;
};

}  // namespace

int run_detect(const DetectOptions& options, std::ostream& log) {
    options.config.validate();
    if (!options.replay_path.has_value() && !options.live) {
        throw ConfigError(
            "refusing to contact live backends without --live; pass --replay <script> for an "
            "offline run");
    }
    if (options.jobs < 1) {
        throw ConfigError("jobs must be >= 1");
    }

    std::filesystem::create_directories(options.output_dir);
    const std::vector<std::filesystem::path> images = list_images(options.input_dir);

    std::unique_ptr<VlmBackend> vlm;
    std::unique_ptr<MllmBackend> mllm;
    if (options.replay_path.has_value()) {
        auto script = std::make_shared<const ReplayScript>(ReplayScript::load_any(*options.replay_path));
        vlm = std::make_unique<ReplayVlm>(script);
        mllm = std::make_unique<ReplayMllm>(script);
    } else {
        vlm = std::make_unique<HttpVlm>(options.config);
        mllm = std::make_unique<HttpMllm>(options.config);
    }

    const std::filesystem::path checkpoint_path = options.output_dir / "_checkpoint.json";
    Checkpoint checkpoint = Checkpoint::load(checkpoint_path);
    if (!checkpoint.completed.empty()) {
        log << "resuming: " << checkpoint.completed.size() << " checks already done\n";
    }

    std::vector<CheckRecord> records(images.size());
    std::mutex state_mutex;
    std::atomic<std::size_t> next{0};
    std::exception_ptr outage;

    auto work = [&]() {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= images.size()) return;
            {
                std::lock_guard lock(state_mutex);
                if (outage) return;
            }
            const std::filesystem::path& path = images[index];
            CheckRecord record;
            record.source_id = path.stem().string();

            if (checkpoint.completed.count(record.source_id)) {
                record.status = "ok";
                record.note = "already completed in a previous run";
                std::lock_guard lock(state_mutex);
                records[index] = std::move(record);
                continue;
            }

            try {
                const CheckImage image = CheckImage::load(path);
                PipelineOutput output = detect_fields(image, *vlm, *mllm, options.config);

                write_json(options.output_dir / (record.source_id + ".json"),
                           output.result.to_json());
                if (options.overlays) {
                    save_png(draw_detections(image, output.result),
                             options.output_dir / (record.source_id + ".overlay.png"));
                }
                if (options.debug_transcripts && output.signature_loop.has_value()) {
                    write_json(options.output_dir / (record.source_id + ".transcript.json"),
                               output.signature_loop->transcript_json());
                }

                record.status = "ok";
                int detected = 0;
                for (const auto& [kind, field] : output.result.fields) {
                    record.field_status[kind] = field.status;
                    if (field.status == FieldStatus::detected) ++detected;
                }
                std::lock_guard lock(state_mutex);
                checkpoint.completed.insert(record.source_id);
                checkpoint.save(checkpoint_path);
                log << "[" << (index + 1) << "/" << images.size() << "] " << record.source_id
                    << ": " << detected << "/" << kFieldKindCount << " fields\n";
                records[index] = std::move(record);
            } catch (const InputError& e) {
                record.status = "skipped";
                record.note = e.what();
                std::lock_guard lock(state_mutex);
                log << "[" << (index + 1) << "/" << images.size() << "] " << record.source_id
                    << ": skipped (" << e.what() << ")\n";
                records[index] = std::move(record);
            } catch (const BackendError& e) {
                if (e.retryable()) {
                    std::lock_guard lock(state_mutex);
                    if (!outage) outage = std::current_exception();
                    return;
                }
                record.status = "failed";
                record.note = e.what();
                std::lock_guard lock(state_mutex);
                log << "[" << (index + 1) << "/" << images.size() << "] " << record.source_id
                    << ": failed (" << e.what() << ")\n";
                records[index] = std::move(record);
            }
        }
    };

    if (options.jobs == 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        for (int i = 0; i < options.jobs; ++i) workers.emplace_back(work);
        for (std::thread& worker : workers) worker.join();
    }

    if (outage) {
        checkpoint.save(checkpoint_path);
        log << "backend outage; checkpoint kept at " << checkpoint_path.string()
            << " -- rerun to resume\n";
        std::rethrow_exception(outage);
    }

    // Summary: resolved config plus per-check and per-field outcomes.
    json check_entries = json::array();
    std::map<FieldKind, int> detected_per_field;
    int processed = 0;
    for (const CheckRecord& record : records) {
        if (record.source_id.empty()) continue;
        json entry{{"source_id", record.source_id}, {"status", record.status}};
        if (!record.note.empty()) entry["note"] = record.note;
        if (!record.field_status.empty()) {
            json fields = json::object();
            for (const auto& [kind, status] : record.field_status) {
                fields[std::string(field_kind_name(kind))] = field_status_name(status);
                if (status == FieldStatus::detected) ++detected_per_field[kind];
            }
            entry["fields"] = std::move(fields);
        }
        if (record.status == "ok" && !record.field_status.empty()) ++processed;
        check_entries.push_back(std::move(entry));
    }
    json rates = json::object();
    for (FieldKind kind : all_field_kinds()) {
        if (processed == 0) break;
        rates[std::string(field_kind_name(kind))] =
            static_cast<double>(detected_per_field[kind]) / processed;
    }
    write_json(options.output_dir / "summary.json",
               json{{"config", options.config.to_json()},
                    {"checks", std::move(check_entries)},
                    {"detection_rates", std::move(rates)}});

    std::filesystem::remove(checkpoint_path);

    const bool any_ok = std::any_of(records.begin(), records.end(), [](const CheckRecord& r) {
        return r.status == "ok";
    });
    return any_ok ? kExitOk : kExitInput;
}

int run_evaluate(const EvaluateOptions& options, std::ostream& log) {
    std::map<std::string, std::string> label_map;
    if (options.label_map_path.has_value()) {
        std::ifstream in(*options.label_map_path);
        if (!in) {
            throw InputError("cannot open label map '" + options.label_map_path->string() + "'");
        }
        json body;
        try {
            in >> body;
        } catch (const json::exception& e) {
            throw InputError(std::string("label map is not valid JSON: ") + e.what());
        }
        for (const auto& [from, to] : body.items()) {
            label_map[from] = to.get<std::string>();
        }
    }

    LoadReport load_report;
    GroundTruth truth = load_ground_truth(options.truth_path, label_map, &load_report);
    for (const auto& skip : load_report.skipped) {
        log << "annotation skipped: '" << skip.label << "' in " << skip.source_id << " ("
            << skip.reason << ")\n";
    }
    if (options.transcriptions_csv.has_value()) {
        load_transcriptions_csv(*options.transcriptions_csv, truth);
    }

    const DetectionCorpus detections = load_detections_dir(options.detections_dir);

    // Strict id matching, both directions.
    std::vector<std::string> missing_detections;
    for (const auto& [source_id, check] : truth.checks) {
        if (!detections.count(source_id)) missing_detections.push_back(source_id);
    }
    std::vector<std::string> missing_truth;
    for (const auto& [source_id, result] : detections) {
        if (!truth.checks.count(source_id)) missing_truth.push_back(source_id);
    }
    if (!missing_detections.empty() || !missing_truth.empty()) {
        std::string msg = "evaluate: source_id mismatch.";
        if (!missing_detections.empty()) {
            msg += " No detections for:";
            for (const std::string& id : missing_detections) msg += " " + id;
            msg += ".";
        }
        if (!missing_truth.empty()) {
            msg += " No ground truth for:";
            for (const std::string& id : missing_truth) msg += " " + id;
            msg += ".";
        }
        throw InputError(msg);
    }

    EvalReport report = detection_metrics(detections, truth);
    const EvalReport ner_report = ner_metrics(detections, truth, options.lowercase_cer);
    report.ner = ner_report.ner;
    report.ner_overall_weighted_mean = ner_report.ner_overall_weighted_mean;

    std::optional<EvalReport> baseline;
    if (options.baseline_dir.has_value()) {
        const DetectionCorpus baseline_detections = load_detections_dir(*options.baseline_dir);
        baseline = detection_metrics(baseline_detections, truth);
    }

    std::filesystem::create_directories(options.output_dir);
    write_json(options.output_dir / "report.json", report.to_json());
    if (baseline.has_value()) {
        write_json(options.output_dir / "baseline_report.json", baseline->to_json());
    }

    const std::string detection_table = render_detection_table(
        report, "detections", baseline.has_value() ? &*baseline : nullptr);
    const std::string ner_table = render_ner_table(report);
    {
        std::ofstream out(options.output_dir / "report.txt");
        out << detection_table << '\n' << ner_table;
    }
    log << detection_table << '\n' << ner_table;
    return kExitOk;
}

int run_export_labels(const ExportOptions& options, std::ostream& log) {
    const DetectionCorpus detections = load_detections_dir(options.detections_dir);

    json images = json::array();
    json annotations = json::array();
    json categories = json::array();
    std::map<FieldKind, int> category_ids;
    {
        int id = 1;
        for (FieldKind kind : all_field_kinds()) {
            category_ids[kind] = id;
            categories.push_back(json{{"id", id}, {"name", field_kind_name(kind)}});
            ++id;
        }
    }

    int image_id = 1;
    int annotation_id = 1;
    for (const auto& [source_id, result] : detections) {
        images.push_back(json{{"id", image_id},
                              {"file_name", source_id + ".png"},
                              {"width", result.width},
                              {"height", result.height}});
        for (FieldKind kind : all_field_kinds()) {
            auto it = result.fields.find(kind);
            if (it == result.fields.end() || !it->second.detection.has_value()) continue;
            const BoundingBox& box = it->second.detection->box;
            annotations.push_back(json{{"id", annotation_id++},
                                       {"image_id", image_id},
                                       {"category_id", category_ids[kind]},
                                       {"bbox", {box.x1, box.y1, box.width(), box.height()}},
                                       {"area", box.area()},
                                       {"iscrowd", 0}});
        }
        ++image_id;
    }

    if (options.output_file.has_parent_path()) {
        std::filesystem::create_directories(options.output_file.parent_path());
    }
    write_json(options.output_file,
               json{{"images", std::move(images)},
                    {"annotations", std::move(annotations)},
                    {"categories", std::move(categories)}});
    log << "exported " << (annotation_id - 1) << " annotations over " << (image_id - 1)
        << " checks to " << options.output_file.string() << '\n';
    return kExitOk;
}

int run_render(const RenderOptions& options, std::ostream& log) {
    const DetectionCorpus detections = load_detections_dir(options.detections_dir);
    std::filesystem::create_directories(options.output_dir);
    int rendered = 0;
    for (const std::filesystem::path& path : list_images(options.input_dir)) {
        const std::string source_id = path.stem().string();
        auto it = detections.find(source_id);
        if (it == detections.end()) continue;
        const CheckImage image = CheckImage::load(path);
        save_png(draw_detections(image, it->second),
                 options.output_dir / (source_id + ".overlay.png"));
        ++rendered;
    }
    if (rendered == 0) {
        throw InputError("render: no image in the input dir matches a detection file");
    }
    log << "rendered " << rendered << " overlays to " << options.output_dir.string() << '\n';
    return kExitOk;
}

int run_validate_config(const std::filesystem::path& config_path, std::ostream& log) {
    const EngineConfig config = EngineConfig::load(config_path);
    log << config.to_json().dump(2) << '\n';
    return kExitOk;
}

int exit_code_for_current_exception(std::ostream& log) {
    try {
        throw;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InputError& e) {
        log << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const BackendError& e) {
        log << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace checkfield::cli
