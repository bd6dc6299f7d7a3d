#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "checkfield/config.hpp"

namespace checkfield::cli {

// Process exit codes; CLI11 usage errors keep their own code.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitBackend = 4;

struct DetectOptions {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    EngineConfig config;
    // Replay script file or directory of scripts; live mode needs the
    // explicit flag, otherwise the run is refused.
    std::optional<std::filesystem::path> replay_path;
    bool live = false;
    bool overlays = false;
    bool debug_transcripts = false;
    int jobs = 1;
};

struct EvaluateOptions {
    std::filesystem::path detections_dir;
    std::optional<std::filesystem::path> baseline_dir;
    std::filesystem::path truth_path;
    std::optional<std::filesystem::path> transcriptions_csv;
    std::optional<std::filesystem::path> label_map_path;
    std::filesystem::path output_dir;
    bool lowercase_cer = false;
};

struct ExportOptions {
    std::filesystem::path detections_dir;
    std::filesystem::path output_file;
};

struct RenderOptions {
    std::filesystem::path input_dir;
    std::filesystem::path detections_dir;
    std::filesystem::path output_dir;
};

int run_detect(const DetectOptions& options, std::ostream& log);
int run_evaluate(const EvaluateOptions& options, std::ostream& log);
int run_export_labels(const ExportOptions& options, std::ostream& log);
int run_render(const RenderOptions& options, std::ostream& log);
int run_validate_config(const std::filesystem::path& config_path, std::ostream& log);

// Maps engine exceptions onto the exit codes above, logging the message.
int exit_code_for_current_exception(std::ostream& log);

}  // namespace checkfield::cli
