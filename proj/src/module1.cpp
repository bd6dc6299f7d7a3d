#include "checkfield/module1.hpp"

#include "checkfield/errors.hpp"
#include "checkfield/render.hpp"

namespace checkfield {

using nlohmann::json;

namespace {

// One retry on protocol violations and malformed replies; the request is
// resent unchanged, then the error propagates.
template <typename Call>
auto with_one_retry(Call&& call) {
    try {
        return call();
    } catch (const ProtocolViolationError&) {
        return call();
    } catch (const MalformedResponseError&) {
        return call();
    }
}

}  // namespace

json LoopOutcome::transcript_json() const {
    json turns = json::array();
    for (const TranscriptEntry& entry : transcript) {
        turns.push_back(json{{"label", entry.label},
                             {"verdict", entry.verdict.passed() ? "Pass" : "Fail"},
                             {"explanation", entry.verdict.explanation},
                             {"live_count", entry.live_count},
                             {"memory_size", entry.memory_size}});
    }
    return json{{"found", found()},
                {"iterations_used", iterations_used},
                {"diagnostic", diagnostic},
                {"turns", std::move(turns)}};
}

LoopOutcome detect_signature(const CheckImage& image, const CandidateSet& candidates, int t_max,
                             MllmBackend& mllm) {
    if (t_max < 1) {
        throw ContractError("detect_signature: t_max must be >= 1");
    }

    LoopOutcome outcome;
    if (candidates.empty()) {
        outcome.diagnostic = "no candidates to select from";
        return outcome;
    }

    AgentState state{candidates, {}, 0};
    while (state.iteration < t_max && !state.candidates.empty()) {
        const cv::Mat overlay = overlay_labels(image, state.candidates);
        const std::vector<std::string> live = state.candidates.labels();

        const std::string label = with_one_retry([&] {
            return mllm.select_label(overlay, FieldKind::signature, live, state.memory);
        });

        const CandidateSet::Entry& chosen = state.candidates.at(label);
        const cv::Mat render = render_single_box(image, chosen.scored.box, chosen.label);
        const MllmVerdict verdict = with_one_retry([&] {
            return mllm.evaluate(render, FieldKind::signature);
        });

        outcome.transcript.push_back(LoopOutcome::TranscriptEntry{
            label, verdict, static_cast<int>(live.size()),
            static_cast<int>(state.memory.size())});
        ++state.iteration;

        if (verdict.passed()) {
            FieldDetection::Provenance provenance;
            provenance.module = 1;
            provenance.iterations = state.iteration;
            provenance.selected_label = label;
            outcome.detection =
                FieldDetection(FieldKind::signature, chosen.scored.box, std::move(provenance));
            outcome.iterations_used = state.iteration;
            return outcome;
        }

        state.memory.push_back(label);
        state.candidates = state.candidates.without(label);
    }

    outcome.iterations_used = state.iteration;
    outcome.diagnostic = state.candidates.empty()
                             ? "all candidates rejected by the evaluator"
                             : "iteration cap reached before a candidate passed";
    return outcome;
}

}  // namespace checkfield
