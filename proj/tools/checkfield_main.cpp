#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "checkfield/cli.hpp"
#include "checkfield/errors.hpp"

namespace {

using checkfield::EngineConfig;

// Engine knobs shared by subcommands that run the pipeline. Flags override
// whatever the config file says.
struct ConfigFlags {
    std::optional<std::string> config_path;
    std::optional<double> score_threshold;
    std::optional<double> nms_iou;
    std::optional<int> max_detections;
    std::optional<double> cer_threshold;
    std::optional<int> t_max;
    std::optional<int> stack_page_size;
    std::optional<bool> lowercase_cer;
    std::optional<int> max_in_flight;
    std::optional<std::string> vlm_url;
    std::optional<std::string> mllm_url;
    std::optional<std::string> vlm_key_env;
    std::optional<std::string> mllm_key_env;

    void attach(CLI::App& app) {
        app.add_option("--config", config_path, "engine config JSON file");
        app.add_option("--score-threshold", score_threshold,
                       "detector confidence threshold (0.001-0.03)");
        app.add_option("--nms-iou", nms_iou, "IoU threshold for non-max suppression");
        app.add_option("--max-detections", max_detections, "detector proposal cap");
        app.add_option("--cer-threshold", cer_threshold,
                       "CER below which stacked candidates survive");
        app.add_option("--t-max", t_max, "iteration cap for the agentic loops");
        app.add_option("--stack-page-size", stack_page_size, "crops per stacked OCR page (1-7)");
        app.add_option("--lowercase-cer", lowercase_cer, "lowercase texts before CER");
        app.add_option("--max-in-flight", max_in_flight, "cap on concurrent live requests");
        app.add_option("--vlm-url", vlm_url, "VLM backend base URL");
        app.add_option("--mllm-url", mllm_url, "MLLM backend base URL");
        app.add_option("--vlm-key-env", vlm_key_env, "env var holding the VLM credential");
        app.add_option("--mllm-key-env", mllm_key_env, "env var holding the MLLM credential");
    }

    EngineConfig resolve() const {
        EngineConfig config;
        if (config_path) config = EngineConfig::load(*config_path);
        if (score_threshold) config.score_threshold = *score_threshold;
        if (nms_iou) config.nms_iou = *nms_iou;
        if (max_detections) config.max_detections = *max_detections;
        if (cer_threshold) config.cer_threshold = *cer_threshold;
        if (t_max) config.t_max = *t_max;
        if (stack_page_size) config.stack_page_size = *stack_page_size;
        if (lowercase_cer) config.lowercase_cer = *lowercase_cer;
        if (max_in_flight) config.max_in_flight = *max_in_flight;
        if (vlm_url) config.vlm.base_url = *vlm_url;
        if (mllm_url) config.mllm.base_url = *mllm_url;
        if (vlm_key_env) config.vlm.api_key_env = *vlm_key_env;
        if (mllm_key_env) config.mllm.api_key_env = *mllm_key_env;
        config.validate();
        return config;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free check field detection engine"};
    app.require_subcommand(1);

    // detect
    auto* detect = app.add_subcommand("detect", "detect fields on a directory of check images");
    checkfield::cli::DetectOptions detect_options;
    ConfigFlags detect_flags;
    std::optional<std::string> replay_path;
    detect->add_option("--input", detect_options.input_dir, "directory of check images")
        ->required();
    detect->add_option("--out", detect_options.output_dir, "output directory")->required();
    detect->add_option("--replay", replay_path, "replay script file or directory");
    detect->add_flag("--live", detect_options.live, "allow contacting live backends");
    detect->add_flag("--overlays", detect_options.overlays, "write detection overlay PNGs");
    detect->add_flag("--debug-transcripts", detect_options.debug_transcripts,
                     "write signature-loop transcripts");
    detect->add_option("--jobs", detect_options.jobs, "checks processed concurrently");
    detect_flags.attach(*detect);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score detections against ground truth");
    checkfield::cli::EvaluateOptions evaluate_options;
    std::optional<std::string> baseline_dir, transcriptions_csv, label_map_path;
    evaluate->add_option("--detections", evaluate_options.detections_dir,
                         "directory of detection JSON files")
        ->required();
    evaluate->add_option("--truth", evaluate_options.truth_path,
                         "annotation file (native, VIA, or COCO JSON)")
        ->required();
    evaluate->add_option("--out", evaluate_options.output_dir, "report output directory")
        ->required();
    evaluate->add_option("--baseline", baseline_dir, "second detections dir for comparison");
    evaluate->add_option("--transcriptions", transcriptions_csv,
                         "source_id,field,text CSV with reference transcriptions");
    evaluate->add_option("--label-map", label_map_path,
                         "JSON mapping annotation labels to field names");
    evaluate->add_flag("--lowercase-cer", evaluate_options.lowercase_cer,
                       "lowercase texts before CER");

    // export-labels
    auto* export_labels =
        app.add_subcommand("export-labels", "export detections as a COCO-style dataset");
    checkfield::cli::ExportOptions export_options;
    export_labels
        ->add_option("--detections", export_options.detections_dir,
                     "directory of detection JSON files")
        ->required();
    export_labels->add_option("--out", export_options.output_file, "dataset JSON path")
        ->required();

    // render
    auto* render = app.add_subcommand("render", "draw final detections onto the checks");
    checkfield::cli::RenderOptions render_options;
    render->add_option("--input", render_options.input_dir, "directory of check images")
        ->required();
    render
        ->add_option("--detections", render_options.detections_dir,
                     "directory of detection JSON files")
        ->required();
    render->add_option("--out", render_options.output_dir, "overlay output directory")->required();

    // validate-config
    auto* validate = app.add_subcommand("validate-config", "parse and echo a config file");
    std::string validate_path;
    validate->add_option("--config", validate_path, "engine config JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*detect) {
            detect_options.config = detect_flags.resolve();
            if (replay_path) detect_options.replay_path = *replay_path;
            return checkfield::cli::run_detect(detect_options, std::cerr);
        }
        if (*evaluate) {
            if (baseline_dir) evaluate_options.baseline_dir = *baseline_dir;
            if (transcriptions_csv) evaluate_options.transcriptions_csv = *transcriptions_csv;
            if (label_map_path) evaluate_options.label_map_path = *label_map_path;
            return checkfield::cli::run_evaluate(evaluate_options, std::cout);
        }
        if (*export_labels) {
            return checkfield::cli::run_export_labels(export_options, std::cout);
        }
        if (*render) {
            return checkfield::cli::run_render(render_options, std::cout);
        }
        if (*validate) {
            return checkfield::cli::run_validate_config(validate_path, std::cout);
        }
    } catch (...) {
        return checkfield::cli::exit_code_for_current_exception(std::cerr);
    }
    return 0;
}
