#include "checkfield/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "checkfield/errors.hpp"
#include "checkfield/text_metrics.hpp"

namespace checkfield {

using nlohmann::json;

namespace {

std::string apply_label_map(const std::string& label,
                            const std::map<std::string, std::string>& label_map) {
    auto it = label_map.find(label);
    return it == label_map.end() ? label : it->second;
}

std::string stem_of(const std::string& filename) {
    return std::filesystem::path(filename).stem().string();
}

void insert_field(GroundTruth& truth, LoadReport* report, const std::string& source_id,
                  const std::string& raw_label,
                  const std::map<std::string, std::string>& label_map, double x1, double y1,
                  double x2, double y2, std::optional<std::string> text) {
    const std::string label = apply_label_map(raw_label, label_map);
    const std::optional<FieldKind> kind = parse_field_kind(label);
    if (!kind.has_value()) {
        if (report) report->skipped.push_back({source_id, raw_label, "unknown field name"});
        return;
    }
    if (!(x1 < x2) || !(y1 < y2) || x1 < 0.0 || y1 < 0.0) {
        throw InputError("ground truth: malformed geometry for '" + raw_label + "' in check '" +
                         source_id + "'");
    }
    auto& fields = truth.checks[source_id].fields;
    if (fields.count(*kind)) {
        throw InputError("ground truth: duplicate box for field '" + label + "' in check '" +
                         source_id + "'");
    }
    fields.emplace(*kind, GroundTruth::FieldTruth{
                              BoundingBox(x1, y1, x2, y2, CoordSpace::original_space),
                              std::move(text)});
}

GroundTruth parse_native(const json& body, const std::map<std::string, std::string>& label_map,
                         LoadReport* report) {
    GroundTruth truth;
    for (const json& check : body["checks"]) {
        const std::string source_id = check.value("source_id", "");
        if (source_id.empty()) {
            throw InputError("ground truth: check entry without source_id");
        }
        GroundTruth::CheckTruth& entry = truth.checks[source_id];
        if (check.contains("width") && check.contains("height")) {
            entry.dims = {check["width"].get<int>(), check["height"].get<int>()};
        }
        if (!check.contains("fields")) continue;
        for (const auto& [label, field] : check["fields"].items()) {
            if (!field.is_object() || !field.contains("box") || !field["box"].is_array() ||
                field["box"].size() != 4) {
                throw InputError("ground truth: field '" + label + "' in '" + source_id +
                                 "' needs box [x1,y1,x2,y2]");
            }
            std::optional<std::string> text;
            if (field.contains("text") && field["text"].is_string()) {
                text = field["text"].get<std::string>();
            }
            insert_field(truth, report, source_id, label, label_map,
                         field["box"][0].get<double>(), field["box"][1].get<double>(),
                         field["box"][2].get<double>(), field["box"][3].get<double>(),
                         std::move(text));
        }
    }
    return truth;
}

std::string region_label(const json& attributes) {
    for (const char* key : {"field", "label", "name"}) {
        if (attributes.contains(key) && attributes[key].is_string()) {
            return attributes[key].get<std::string>();
        }
    }
    for (const auto& [key, value] : attributes.items()) {
        if (value.is_string()) return value.get<std::string>();
    }
    return {};
}

GroundTruth parse_via(const json& metadata, const std::map<std::string, std::string>& label_map,
                      LoadReport* report) {
    GroundTruth truth;
    for (const auto& [key, entry] : metadata.items()) {
        if (!entry.is_object() || !entry.contains("filename")) {
            throw InputError("ground truth: VIA entry '" + key + "' lacks a filename");
        }
        const std::string source_id = stem_of(entry["filename"].get<std::string>());
        truth.checks[source_id];  // present even with no regions
        if (!entry.contains("regions")) continue;
        for (const json& region : entry["regions"]) {
            const json& shape = region.value("shape_attributes", json::object());
            const std::string name = shape.value("name", "");
            const std::string label = region_label(region.value("region_attributes", json::object()));
            if (name != "rect") {
                if (report) {
                    report->skipped.push_back({source_id, label, "unsupported shape '" + name + "'"});
                }
                continue;
            }
            const double x = shape.value("x", 0.0);
            const double y = shape.value("y", 0.0);
            const double w = shape.value("width", 0.0);
            const double h = shape.value("height", 0.0);
            insert_field(truth, report, source_id, label, label_map, x, y, x + w, y + h,
                         std::nullopt);
        }
    }
    return truth;
}

GroundTruth parse_coco(const json& body, const std::map<std::string, std::string>& label_map,
                       LoadReport* report) {
    GroundTruth truth;
    std::map<int, std::string> image_ids;
    for (const json& image : body["images"]) {
        const std::string source_id = stem_of(image.value("file_name", ""));
        image_ids[image["id"].get<int>()] = source_id;
        GroundTruth::CheckTruth& entry = truth.checks[source_id];
        if (image.contains("width") && image.contains("height")) {
            entry.dims = {image["width"].get<int>(), image["height"].get<int>()};
        }
    }
    std::map<int, std::string> categories;
    for (const json& category : body["categories"]) {
        categories[category["id"].get<int>()] = category.value("name", "");
    }
    for (const json& annotation : body["annotations"]) {
        auto image_it = image_ids.find(annotation.value("image_id", -1));
        auto category_it = categories.find(annotation.value("category_id", -1));
        if (image_it == image_ids.end() || category_it == categories.end()) {
            throw InputError("ground truth: annotation references unknown image or category");
        }
        const json& bbox = annotation["bbox"];
        if (!bbox.is_array() || bbox.size() != 4) {
            throw InputError("ground truth: COCO bbox must be [x,y,w,h]");
        }
        const double x = bbox[0].get<double>();
        const double y = bbox[1].get<double>();
        const double w = bbox[2].get<double>();
        const double h = bbox[3].get<double>();
        insert_field(truth, report, image_it->second, category_it->second, label_map, x, y, x + w,
                     y + h, std::nullopt);
    }
    return truth;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CerStats cer_stats_of(const std::vector<double>& values) {
    CerStats stats;
    stats.count = static_cast<int>(values.size());
    if (values.empty()) return stats;
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double variance = 0.0;
    for (double v : values) variance += (v - stats.mean) * (v - stats.mean);
    variance /= values.size();  // population
    stats.stddev = std::sqrt(variance);
    stats.median = median_of(values);
    return stats;
}

}  // namespace

GroundTruth load_ground_truth(const std::filesystem::path& path,
                              const std::map<std::string, std::string>& label_map,
                              LoadReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("ground truth: cannot open '" + path.string() + "'");
    }
    json body;
    try {
        in >> body;
    } catch (const json::exception& e) {
        throw InputError("ground truth: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!body.is_object()) {
        throw InputError("ground truth: top level of '" + path.string() + "' must be an object");
    }

    GroundTruth truth;
    if (body.contains("checks")) {
        truth = parse_native(body, label_map, report);
    } else if (body.contains("_via_img_metadata")) {
        truth = parse_via(body["_via_img_metadata"], label_map, report);
    } else if (body.contains("images") && body.contains("annotations")) {
        truth = parse_coco(body, label_map, report);
    } else if (!body.empty() &&
               std::all_of(body.items().begin(), body.items().end(),
                           [](const auto& item) { return item.value().contains("regions"); })) {
        truth = parse_via(body, label_map, report);  // flat VIA export
    } else {
        throw InputError("ground truth: unrecognized annotation layout in '" + path.string() + "'");
    }

    // Boxes must sit inside the image when dimensions are known.
    for (const auto& [source_id, check] : truth.checks) {
        if (!check.dims.has_value()) continue;
        for (const auto& [kind, field] : check.fields) {
            if (field.box.x2 > check.dims->first || field.box.y2 > check.dims->second) {
                throw InputError("ground truth: box for '" +
                                 std::string(field_kind_name(kind)) + "' exceeds image bounds in '" +
                                 source_id + "'");
            }
        }
    }
    return truth;
}

void load_transcriptions_csv(const std::filesystem::path& path, GroundTruth& truth) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("transcriptions: cannot open '" + path.string() + "'");
    }

    // Minimal RFC-4180: quoted fields may contain commas and doubled quotes.
    auto split_csv = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        cell.push_back('"');
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    cell.push_back(c);
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(std::move(cell));
                cell.clear();
            } else {
                cell.push_back(c);
            }
        }
        cells.push_back(std::move(cell));
        return cells;
    };

    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv(line);
        if (first) {
            first = false;
            if (cells.size() >= 2 && cells[0] == "source_id") continue;  // header
        }
        if (cells.size() < 3) {
            throw InputError("transcriptions: expected source_id,field,text rows");
        }
        const std::optional<FieldKind> kind = parse_field_kind(cells[1]);
        if (!kind.has_value()) {
            throw InputError("transcriptions: unknown field '" + cells[1] + "'");
        }
        auto check_it = truth.checks.find(cells[0]);
        if (check_it == truth.checks.end()) {
            throw InputError("transcriptions: unknown check '" + cells[0] + "'");
        }
        auto field_it = check_it->second.fields.find(*kind);
        if (field_it == check_it->second.fields.end()) {
            throw InputError("transcriptions: check '" + cells[0] + "' has no box for '" +
                             cells[1] + "'");
        }
        field_it->second.text = cells[2];
    }
}

EvalReport detection_metrics(const DetectionCorpus& detections, const GroundTruth& truth) {
    std::vector<std::string> shared;
    for (const auto& [source_id, check] : truth.checks) {
        if (detections.count(source_id)) shared.push_back(source_id);
    }
    if (shared.empty()) {
        throw InputError("detection_metrics: detections and ground truth share no source_ids");
    }

    EvalReport report;
    DetectionStats overall;
    int fields_counted = 0;
    for (FieldKind kind : all_field_kinds()) {
        std::vector<double> ious;
        for (const std::string& source_id : shared) {
            const auto& check_truth = truth.checks.at(source_id);
            auto truth_it = check_truth.fields.find(kind);
            if (truth_it == check_truth.fields.end()) continue;  // no ground truth, no sample

            double value = 0.0;  // a miss scores zero
            const DetectionResult& detection = detections.at(source_id);
            auto field_it = detection.fields.find(kind);
            if (field_it != detection.fields.end() && field_it->second.detection.has_value()) {
                value = iou(field_it->second.detection->box, truth_it->second.box);
            }
            ious.push_back(value);
        }
        if (ious.empty()) continue;

        DetectionStats stats;
        stats.count = static_cast<int>(ious.size());
        stats.miou = std::accumulate(ious.begin(), ious.end(), 0.0) / ious.size();
        stats.acc25 = static_cast<double>(std::count_if(ious.begin(), ious.end(),
                                                        [](double v) { return v >= 0.25; })) /
                      ious.size();
        stats.acc50 = static_cast<double>(std::count_if(ious.begin(), ious.end(),
                                                        [](double v) { return v >= 0.50; })) /
                      ious.size();
        report.detection[kind] = stats;

        overall.miou += stats.miou;
        overall.acc25 += stats.acc25;
        overall.acc50 += stats.acc50;
        overall.count += stats.count;
        ++fields_counted;
    }
    if (fields_counted > 0) {
        overall.miou /= fields_counted;
        overall.acc25 /= fields_counted;
        overall.acc50 /= fields_counted;
        report.detection_overall = overall;
    }
    return report;
}

EvalReport ner_metrics(const DetectionCorpus& detections, const GroundTruth& truth,
                       bool lowercase) {
    EvalReport report;
    double weighted_sum = 0.0;
    int total = 0;
    for (FieldKind kind : module2_field_kinds()) {
        std::vector<double> values;
        for (const auto& [source_id, check_truth] : truth.checks) {
            auto detection_it = detections.find(source_id);
            if (detection_it == detections.end()) continue;
            auto truth_it = check_truth.fields.find(kind);
            if (truth_it == check_truth.fields.end() || !truth_it->second.text.has_value()) {
                continue;  // field absent on this check
            }
            const std::string reference = normalize(*truth_it->second.text, lowercase);
            if (reference.empty()) continue;

            std::string hypothesis;  // a failed extraction scores as empty
            auto ner_it = detection_it->second.ner.find(kind);
            if (ner_it != detection_it->second.ner.end() && ner_it->second.has_value()) {
                hypothesis = normalize(*ner_it->second, lowercase);
            }
            values.push_back(cer(reference, hypothesis).value);
        }
        if (values.empty()) continue;
        const CerStats stats = cer_stats_of(values);
        report.ner[kind] = stats;
        weighted_sum += stats.mean * stats.count;
        total += stats.count;
    }
    if (total > 0) {
        report.ner_overall_weighted_mean = weighted_sum / total;
    }
    return report;
}

DetectionCorpus load_detections_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw InputError("detections: '" + dir.string() + "' is not a directory");
    }
    DetectionCorpus corpus;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        const std::string stem = entry.path().stem().string();
        if (stem == "summary" || stem.empty() || stem.front() == '_') continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        json body;
        try {
            in >> body;
        } catch (const json::exception& e) {
            throw InputError("detections: '" + file.string() + "' is not valid JSON: " + e.what());
        }
        if (!body.is_object() || !body.contains("source_id")) continue;  // not a detection file
        DetectionResult result = DetectionResult::from_json(body);
        corpus[result.source_id] = std::move(result);
    }
    if (corpus.empty()) {
        throw InputError("detections: no detection JSON files under '" + dir.string() + "'");
    }
    return corpus;
}

json EvalReport::to_json() const {
    json out = json::object();
    if (!detection.empty()) {
        json per_field = json::object();
        for (const auto& [kind, stats] : detection) {
            per_field[std::string(field_kind_name(kind))] = json{{"miou", stats.miou},
                                                                 {"acc25", stats.acc25},
                                                                 {"acc50", stats.acc50},
                                                                 {"count", stats.count}};
        }
        out["detection"] = json{{"per_field", std::move(per_field)}};
        if (detection_overall.has_value()) {
            out["detection"]["overall"] = json{{"miou", detection_overall->miou},
                                               {"acc25", detection_overall->acc25},
                                               {"acc50", detection_overall->acc50},
                                               {"count", detection_overall->count}};
        }
    }
    if (!ner.empty()) {
        json per_field = json::object();
        for (const auto& [kind, stats] : ner) {
            per_field[std::string(field_kind_name(kind))] = json{{"mean", stats.mean},
                                                                 {"std", stats.stddev},
                                                                 {"median", stats.median},
                                                                 {"count", stats.count}};
        }
        out["ner"] = json{{"per_field", std::move(per_field)}};
        if (ner_overall_weighted_mean.has_value()) {
            out["ner"]["overall_weighted_mean"] = *ner_overall_weighted_mean;
        }
    }
    return out;
}

namespace {

std::string fixed3(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << value;
    return out.str();
}

void append_row(std::ostringstream& out, const std::vector<std::string>& cells,
                const std::vector<int>& widths) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out << std::left << std::setw(widths[i]) << cells[i];
    }
    out << '\n';
}

}  // namespace

std::string render_detection_table(const EvalReport& report, const std::string& name,
                                   const EvalReport* baseline,
                                   const std::string& baseline_name) {
    std::vector<int> widths = {18, 9, 10, 9};
    std::ostringstream out;
    std::vector<std::string> header = {"Check field", "mIOU", "Acc@0.25", "Acc@0.5"};
    if (baseline) {
        widths.insert(widths.end(), {9, 10, 9});
        header.insert(header.end(), {"mIOU", "Acc@0.25", "Acc@0.5"});
        out << std::string(18, ' ') << std::left << std::setw(28) << name << baseline_name << '\n';
    } else {
        out << "Detection metrics: " << name << '\n';
    }
    append_row(out, header, widths);

    auto stats_cells = [&](const EvalReport& r, FieldKind kind) -> std::vector<std::string> {
        auto it = r.detection.find(kind);
        if (it == r.detection.end()) return {"-", "-", "-"};
        return {fixed3(it->second.miou), fixed3(it->second.acc25), fixed3(it->second.acc50)};
    };

    for (FieldKind kind : all_field_kinds()) {
        if (!report.detection.count(kind) && !(baseline && baseline->detection.count(kind))) {
            continue;
        }
        std::vector<std::string> row = {std::string(field_kind_name(kind))};
        for (const std::string& cell : stats_cells(report, kind)) row.push_back(cell);
        if (baseline) {
            for (const std::string& cell : stats_cells(*baseline, kind)) row.push_back(cell);
        }
        append_row(out, row, widths);
    }
    if (report.detection_overall.has_value()) {
        std::vector<std::string> row = {"Overall mean", fixed3(report.detection_overall->miou),
                                        fixed3(report.detection_overall->acc25),
                                        fixed3(report.detection_overall->acc50)};
        if (baseline && baseline->detection_overall.has_value()) {
            row.insert(row.end(), {fixed3(baseline->detection_overall->miou),
                                   fixed3(baseline->detection_overall->acc25),
                                   fixed3(baseline->detection_overall->acc50)});
        }
        append_row(out, row, widths);
    }
    return out.str();
}

std::string render_ner_table(const EvalReport& report) {
    const std::vector<int> widths = {18, 9, 9, 9, 7};
    std::ostringstream out;
    out << "Reference-text CER\n";
    append_row(out, {"Check field", "Mean", "Std", "Median", "Total"}, widths);
    for (FieldKind kind : module2_field_kinds()) {
        auto it = report.ner.find(kind);
        if (it == report.ner.end()) continue;
        append_row(out,
                   {std::string(field_kind_name(kind)), fixed3(it->second.mean),
                    fixed3(it->second.stddev), fixed3(it->second.median),
                    std::to_string(it->second.count)},
                   widths);
    }
    if (report.ner_overall_weighted_mean.has_value()) {
        append_row(out, {"Weighted mean", fixed3(*report.ner_overall_weighted_mean), "", "", ""},
                   widths);
    }
    return out.str();
}

}  // namespace checkfield
