#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "checkfield/detection.hpp"
#include "checkfield/field_kind.hpp"
#include "checkfield/geometry.hpp"

namespace checkfield {

// Manually labeled reference data: at most one box (and optionally the
// transcribed text) per field per check.
struct GroundTruth {
    struct FieldTruth {
        BoundingBox box;
        std::optional<std::string> text;
    };
    struct CheckTruth {
        std::map<FieldKind, FieldTruth> fields;
        std::optional<std::pair<int, int>> dims;  // (width, height) when known
    };

    std::map<std::string, CheckTruth> checks;  // keyed by source_id
};

struct LoadReport {
    struct Skip {
        std::string source_id;
        std::string label;
        std::string reason;
    };
    std::vector<Skip> skipped;
};

// Accepts three layouts: the engine's native annotation JSON, VGG Image
// Annotator project JSON, and COCO-style dataset JSON (as written by the
// label exporter). `label_map` renames annotation labels onto field kinds
// before parsing (e.g. "sig" -> "signature"); unknown labels are skipped and
// reported, malformed geometry is an error.
GroundTruth load_ground_truth(const std::filesystem::path& path,
                              const std::map<std::string, std::string>& label_map = {},
                              LoadReport* report = nullptr);

// Merges transcription rows (source_id,field,text CSV) into a corpus.
void load_transcriptions_csv(const std::filesystem::path& path, GroundTruth& truth);

struct DetectionStats {
    double miou = 0.0;
    double acc25 = 0.0;  // fraction with IoU >= 0.25 (inclusive)
    double acc50 = 0.0;
    int count = 0;  // checks with ground truth for this field
};

struct CerStats {
    double mean = 0.0;
    double stddev = 0.0;  // population formula (n divisor)
    double median = 0.0;
    int count = 0;
};

struct EvalReport {
    std::map<FieldKind, DetectionStats> detection;
    std::optional<DetectionStats> detection_overall;  // unweighted mean over fields

    std::map<FieldKind, CerStats> ner;
    std::optional<double> ner_overall_weighted_mean;  // count-weighted

    nlohmann::json to_json() const;
};

using DetectionCorpus = std::map<std::string, DetectionResult>;

// Per-field mIOU and Acc@0.25/0.5 over checks where ground truth exists; a
// missed detection counts as IoU 0. Evaluated over the intersection of
// source_ids; an empty intersection is an error.
EvalReport detection_metrics(const DetectionCorpus& detections, const GroundTruth& truth);

// Per-field CER statistics of the NER texts against the transcriptions.
// Checks without a transcription for a field are excluded from that field's
// sample; an absent NER result scores as an empty hypothesis.
EvalReport ner_metrics(const DetectionCorpus& detections, const GroundTruth& truth,
                       bool lowercase = false);

// Reads every *.json detection file under a directory.
DetectionCorpus load_detections_dir(const std::filesystem::path& dir);

// Aligned-text tables in the shape of the usual benchmark summaries. The
// optional baseline adds a second column block for side-by-side comparison.
std::string render_detection_table(const EvalReport& report, const std::string& name,
                                   const EvalReport* baseline = nullptr,
                                   const std::string& baseline_name = "baseline");
std::string render_ner_table(const EvalReport& report);

}  // namespace checkfield
