#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "checkfield/backend.hpp"
#include "checkfield/candidate_set.hpp"
#include "checkfield/detection.hpp"
#include "checkfield/image.hpp"

namespace checkfield {

// Iteration state of the signature selection loop: the live candidates still
// on offer, the labels already rejected, and how many turns have run.
struct AgentState {
    CandidateSet candidates;
    std::vector<std::string> memory;
    int iteration = 0;
};

struct LoopOutcome {
    struct TranscriptEntry {
        std::string label;
        MllmVerdict verdict;
        int live_count = 0;     // candidates on offer when the actor chose
        int memory_size = 0;    // rejected labels at that point
    };

    std::optional<FieldDetection> detection;
    std::string diagnostic;  // set when the loop ends without a detection
    int iterations_used = 0;
    std::vector<TranscriptEntry> transcript;

    bool found() const { return detection.has_value(); }

    nlohmann::json transcript_json() const;
};

// Actor/environment/evaluator loop for the signature field. Each turn: draw
// every live candidate with its label, let the actor pick one, render that
// box alone, and have the evaluator grade it. A failed pick is removed from
// the live set and remembered so the actor is never offered it again. Stops
// on the first Pass, on candidate exhaustion, or after t_max turns.
// `candidates` must already be NMS'd and size-filtered, in original_space.
LoopOutcome detect_signature(const CheckImage& image, const CandidateSet& candidates, int t_max,
                             MllmBackend& mllm);

}  // namespace checkfield
