#pragma once

#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "rtpshape/error.hpp"
#include "rtpshape/leaky_bucket.hpp"
#include "rtpshape/media.hpp"
#include "rtpshape/shape_result.hpp"
#include "rtpshape/token_bucket.hpp"

namespace rtpshape {

using ShaperStage = std::variant<LeakyBucketConfig, TokenBucketConfig>;

inline ShapeResult shape(const StreamTrace& trace, const ShaperStage& stage) {
    return std::visit(
        [&](const auto& cfg) {
            if constexpr (std::is_same_v<std::decay_t<decltype(cfg)>, LeakyBucketConfig>) {
                return leaky_bucket_shape(trace, cfg);
            } else {
                return token_bucket_shape(trace, cfg);
            }
        },
        stage);
}

struct PipelineResult {
    StreamTrace output;
    std::vector<ShapeResult> stages;
};

/// Runs the stages in order; each stage sees the previous stage's departures as arrivals.
inline PipelineResult run_pipeline(std::span<const ShaperStage> stages, const StreamTrace& trace) {
    PipelineResult result;
    result.output = trace;
    result.stages.reserve(stages.size());
    for (std::size_t k = 0; k < stages.size(); ++k) {
        try {
            result.stages.push_back(shape(result.output, stages[k]));
        } catch (const Error& e) {
            throw StageError(k, e.what());
        }
        result.output = result.stages.back().shaped;
    }
    return result;
}

} // namespace rtpshape
